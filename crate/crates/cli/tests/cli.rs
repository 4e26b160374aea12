#[allow(dead_code)]
#[path = "../../core/tests/support/transfer.rs"]
mod transfer;

use std::fs;
use std::path::Path;
use std::process::Command;

use kanewave_core::constants::HBAR_EV_FS;
use kanewave_core::dispersion::{DispersionModel, PhysicalParams};

fn kanewave(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kanewave")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn run_config(dir: &Path, sub: &str, text: &str, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join(format!("{sub}.toml"));
    fs::write(&cfg, text).unwrap();
    let out = dir.join("out");
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    kanewave(&args)
}

fn summary(dir: &Path) -> toml::Table {
    fs::read_to_string(dir.join("out/summary.toml")).unwrap().parse().unwrap()
}

fn float(t: &toml::Table, key: &str) -> f64 {
    t[key].as_float().unwrap()
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const BARRIER: &str = r#"
mode = "scatter"
[model]
order = 2
[potential]
kind = "segments"
segments = [
  { start = 0.0, end = 5.0, v_start = 0.0, v_end = 0.0 },
  { start = 5.0, end = 9.0, v_start = -0.25, v_end = -0.25 },
  { start = 9.0, end = 15.0, v_start = 0.0, v_end = 0.0 },
]
[scatter]
k = 0.6
"#;

#[test]
fn free_particle_transmits_fully() {
    let dir = tempfile::tempdir().unwrap();
    let text = "mode = \"scatter\"\n[model]\norder = 2\n[potential]\nkind = \"segments\"\nsegments = [{ start = 0.0, end = 10.0, v_start = 0.0, v_end = 0.0 }]\n[scatter]\nk = 0.7\n";
    let (code, err) = run_config(dir.path(), "scatter", text, &[]);
    assert_eq!(code, 0, "{err}");
    let s = summary(dir.path());
    assert!((float(&s, "t2") - 1.0).abs() < 1e-12);
    assert!(float(&s, "r2") < 1e-12);
    for name in ["wavefunction.csv", "effective_config.toml", "manifest.toml"] {
        assert!(dir.path().join("out").join(name).exists(), "{name}");
    }
    let rows = csv(&dir.path().join("out/wavefunction.csv"));
    for r in rows {
        let density: f64 = r[3].parse().unwrap();
        assert!((density - 1.0).abs() < 1e-10);
    }
}

#[test]
fn single_barrier_matches_transfer_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run_config(dir.path(), "scatter", BARRIER, &[]);
    assert_eq!(code, 0, "{err}");
    let s = summary(dir.path());
    let beta = DispersionModel::new(2, PhysicalParams::gaas()).unwrap().kinetic_scale();
    let device = transfer::Slabs {
        slabs: vec![(5.0, 0.0), (4.0, -0.25), (6.0, 0.0)],
    };
    let (t2, r2) = transfer::transfer_probabilities(&device, 0.6, beta);
    assert!((float(&s, "t2") - t2).abs() < 1e-8);
    assert!((float(&s, "r2") - r2).abs() < 1e-8);
}

fn sweep_config(order: usize) -> String {
    format!(
        "mode = \"sweep\"\n[model]\norder = {order}\n[potential]\nkind = \"rtd\"\n[sweep]\nk_min = 0.05\nk_max = 1.5\npoints = 30\n"
    )
}

#[test]
fn sweep_incident_current_and_balance() {
    let p = PhysicalParams::gaas();
    for order in [2usize, 4] {
        let dir = tempfile::tempdir().unwrap();
        let (code, err) = run_config(dir.path(), "sweep", &sweep_config(order), &[]);
        assert_eq!(code, 0, "{err}");
        let beta = DispersionModel::new(2, p).unwrap().kinetic_scale();
        let hbar_over_m = 2.0 * beta / HBAR_EV_FS;
        for row in csv(&dir.path().join("out/sweep.csv")) {
            let v: Vec<f64> = row[..7].iter().map(|c| c.parse().unwrap()).collect();
            assert_eq!(row[7], "ok");
            let k = v[0];
            // (ħ/m*) k − (α ħ³/m*²) k³ with α ħ³/m*² = 4 α β² / ħ.
            let want = if order == 2 {
                hbar_over_m * k
            } else {
                hbar_over_m * k - 4.0 * p.alpha * beta * beta / HBAR_EV_FS * k * k * k
            };
            assert!((v[1] - want).abs() <= 1e-12 * want.abs(), "order {order} k {k}: {} vs {want}", v[1]);
            assert!(v[6].abs() < 1e-8 * v[1].abs());
        }
    }
}

const SMALL_ENSEMBLE: &str = r#"
mode = "ensemble"
[model]
order = 4
[potential]
kind = "segments"
segments = [
  { start = 0.0, end = 5.0, v_start = 0.0, v_end = 0.0 },
  { start = 5.0, end = 8.0, v_start = -0.2, v_end = -0.2 },
  { start = 8.0, end = 13.0, v_start = 0.0, v_end = 0.05 },
]
[numerics]
n_kx = 32
n_sigma = 16
quadrature_rtol = 1e-5
[statistics]
fermi_energy = 0.05
"#;

#[test]
fn ensemble_output_is_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ca, ea) = run_config(a.path(), "ensemble", SMALL_ENSEMBLE, &["--threads", "1"]);
    let (cb, eb) = run_config(b.path(), "ensemble", SMALL_ENSEMBLE, &["--threads", "3"]);
    assert_eq!(ca, 0, "{ea}");
    assert_eq!(cb, 0, "{eb}");
    for name in ["density.csv", "current_kx.csv", "summary.toml", "manifest.toml"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn compare_writes_every_pair_and_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_ENSEMBLE.replace("mode = \"ensemble\"", "mode = \"compare\"")
        + "[compare]\norders = [2, 4]\nstatistics = [\"kane\", \"parabolic\"]\n";
    let (code, err) = run_config(dir.path(), "compare", &text, &[]);
    assert_eq!(code, 0, "{err}");
    for tag in ["se2_kane", "se2_parabolic", "se4_kane", "se4_parabolic"] {
        assert!(dir.path().join(format!("out/density_{tag}.csv")).exists());
        assert!(dir.path().join(format!("out/current_kx_{tag}.csv")).exists());
    }
    let s = summary(dir.path());
    let ratios = s["ratios"].as_table().unwrap();
    let j2 = float(s["se2_kane"].as_table().unwrap(), "current");
    let j4 = float(s["se4_kane"].as_table().unwrap(), "current");
    assert!((float(ratios, "se4_over_se2_kane") - j4 / j2).abs() < 1e-15 * (j4 / j2).abs());
    assert!(ratios.contains_key("se2_parabolic_over_kane"));
}

#[test]
fn order_and_stats_overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run_config(dir.path(), "ensemble", SMALL_ENSEMBLE, &["--order", "2", "--stats", "parabolic"]);
    assert_eq!(code, 0, "{err}");
    let eff: toml::Table = fs::read_to_string(dir.path().join("out/effective_config.toml")).unwrap().parse().unwrap();
    assert_eq!(eff["model"]["order"].as_integer(), Some(2));
    assert_eq!(eff["statistics"]["dispersion"].as_str(), Some("parabolic"));
    assert_eq!(eff["numerics"]["n_sigma"].as_integer(), Some(16));
    assert_eq!(eff["numerics"]["points_per_nm"].as_float(), Some(8.0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    assert_eq!(kanewave(&[]).0, 2);
    assert_eq!(kanewave(&["scatter"]).0, 2);

    let (code, err) = run_config(d, "scatter", &BARRIER.replace("order = 2", "order = 2\nfoo = 1"), &[]);
    assert_eq!(code, 3);
    assert!(err.contains(":5:1:"), "{err}");

    let (code, err) = run_config(d, "scatter", &BARRIER.replace("order = 2", "order = 3"), &[]);
    assert_eq!(code, 4);
    assert!(err.contains("model.order"), "{err}");

    let (code, err) = run_config(d, "ensemble", &SMALL_ENSEMBLE.replace("fermi_energy = 0.05", ""), &[]);
    assert_eq!(code, 4);
    assert!(err.contains("statistics.fermi_energy"), "{err}");

    // Incident exactly at the band maximum: the two real roots coincide.
    let w = DispersionModel::new(4, PhysicalParams::gaas()).unwrap().monotone_window().unwrap();
    let text = BARRIER.replace("order = 2", "order = 4").replace("k = 0.6", &format!("k = {w:?}"));
    let (code, err) = run_config(d, "scatter", &text, &[]);
    assert_eq!(code, 5, "{err}");
    let manifest = fs::read_to_string(d.join("out/manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"failed\""));

    let (code, _) = run_config(d, "ensemble", &SMALL_ENSEMBLE.replace("n_sigma = 16", "n_sigma = 16\nmax_nodes = 10"), &[]);
    assert_eq!(code, 6);
    let manifest = fs::read_to_string(d.join("out/manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"partial\""));
    assert!(d.join("out/density.csv").exists());

    let (code, _) = run_config(d, "sweep", BARRIER, &[]);
    assert_eq!(code, 4, "mode mismatch");
}
