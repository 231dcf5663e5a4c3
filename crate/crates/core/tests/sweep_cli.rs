//! Sweep output against a stored snapshot, run determinism, and the
//! `hetnet` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use hetnet_pcp::cli::{run_sweep, Config, RunManifest, CSV_HEADER};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

fn hetnet(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hetnet"));
    // keep the caller's environment from leaking into the flag defaults
    for var in ["CONFIG", "ENGINE", "POLICY", "SEED", "TRIALS", "OUT"] {
        cmd.env_remove(format!("PCPHET_{var}"));
    }
    cmd.args(args).envs(env.iter().copied()).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analytic_sweep_matches_snapshot() {
    let config = Config::load(Path::new(DATA).join("golden_sweep.toml")).unwrap();
    let got = run_sweep(&config).unwrap().csv();
    let want = std::fs::read_to_string(Path::new(DATA).join("golden_sweep.csv")).unwrap();
    let (got, want): (Vec<&str>, Vec<&str>) = (got.lines().collect(), want.lines().collect());
    assert_eq!(got.len(), want.len());
    assert_eq!(got[0], CSV_HEADER);
    for (g, w) in got.iter().zip(&want).skip(1) {
        for (a, b) in g.split(',').zip(w.split(',')) {
            match (a.parse::<f64>(), b.parse::<f64>()) {
                // quadrature and libm differences stay far below this
                (Ok(x), Ok(y)) => assert!((x - y).abs() <= 1e-7 * y.abs().max(1e-3), "{g}\n{w}"),
                _ => assert_eq!(a, b, "{g}\n{w}"),
            }
        }
    }
}

#[test]
fn simulated_sweep_is_deterministic_and_reloadable() {
    let text = "format_version = 1\nsweep_variable = \"sigma_s_km\"\nsweep_values = [0.02, 0.04]\nengines = [\"sim\"]\ntrials = 4000\nseed = 99\n";
    let a = run_sweep(&Config::parse(text).unwrap()).unwrap();
    let b = run_sweep(&Config::parse(text).unwrap()).unwrap();
    assert_eq!(a.csv(), b.csv());

    let dir = tempfile::tempdir().unwrap();
    let paths = a.write(dir.path()).unwrap();
    let reloaded = RunManifest::load(&paths.manifest).unwrap().config().unwrap();
    assert_eq!(run_sweep(&reloaded).unwrap().csv(), std::fs::read_to_string(&paths.csv).unwrap());

    // a different seed must actually change the simulation
    let c = run_sweep(&Config::parse(&text.replace("seed = 99", "seed = 100")).unwrap()).unwrap();
    assert_ne!(a.csv(), c.csv());
}

#[test]
fn coverage_verb_honours_flags_and_environment() {
    let o = hetnet(&["coverage", "--engine", "sim", "--trials", "2000", "--policy", "p1"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("simulation,P1,")).count(), 3, "{out}");

    let env = [("PCPHET_ENGINE", "sim"), ("PCPHET_TRIALS", "2000"), ("PCPHET_POLICY", "p2")];
    let o = hetnet(&["coverage"], &env);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("simulation,P2,")).count(), 3);

    // an explicit flag beats the environment
    let o = hetnet(&["coverage", "--policy", "p1"], &env);
    let out = stdout(&o);
    assert!(out.contains("simulation,P1,") && !out.contains(",P2,"), "{out}");
}

#[test]
fn sweep_and_plot_verbs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(&config, "format_version = 1\nsweep_variable = \"nbar_as\"\nsweep_values = [1.0, 3.0]\nengines = [\"sim\"]\n").unwrap();
    let run1 = dir.path().join("run1");
    let run2 = dir.path().join("run2");
    let s = |p: &Path| p.to_str().unwrap().to_owned();

    let o = hetnet(&["sweep", "--config", &s(&config), "--out", &s(&run1), "--trials", "3000", "--seed", "5"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("point 2/2"));
    let manifest = run1.join("manifest.json");
    let o = hetnet(&["sweep", "--manifest", &s(&manifest)], &[("PCPHET_OUT", &s(&run2))]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(run1.join("sweep.csv")).unwrap(), std::fs::read(run2.join("sweep.csv")).unwrap());

    let o = hetnet(&["plot", &s(&manifest), "fig2"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let script = std::fs::read_to_string(run1.join("fig2.py")).unwrap();
    assert!(script.contains("matplotlib") && script.contains("sweep.csv"));

    // a D sweep was never run, so fig8 has nothing to draw
    let o = hetnet(&["plot", &s(&manifest), "fig8"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("required columns"), "{}", stderr(&o));
    assert!(!run1.join("fig8.py").exists());
}

#[test]
fn failures_set_the_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "format_version = 1\nbogus = 1\n").unwrap();
    let o = hetnet(&["coverage", "--config", unknown.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));

    // the second point cannot use the exact sum: its rows fail, the run goes on
    let partial = dir.path().join("partial.toml");
    std::fs::write(&partial, "format_version = 1\nsweep_variable = \"n_s0\"\nsweep_values = [10.0, 500.0]\nintra_mode = \"exact\"\n").unwrap();
    let out = dir.path().join("out");
    let o = hetnet(&["sweep", "--config", partial.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.ends_with(",ok")).count(), 6);
    assert_eq!(csv.lines().filter(|l| l.contains(",error: ")).count(), 6);

    let o = hetnet(&["coverage", "--engine", "neither"], &[]);
    assert_eq!(o.status.code(), Some(2));
}
