//! End-to-end runs of the `phasecart` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn phasecart(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasecart"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("PHASECART_THREADS")
        .output()
        .unwrap()
}

fn run_ok(out: &Path, args: &[&str]) -> PathBuf {
    let o = phasecart(out, args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    PathBuf::from(String::from_utf8(o.stdout).unwrap().trim())
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn header(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn separatrix_reports_half_for_dicke() {
    let out = scratch("separatrix");
    let dir = run_ok(&out, &["separatrix", "--config", &cfg("dicke.cfg")]);
    assert!(dir.starts_with(&out));
    let name = dir.file_name().unwrap().to_str().unwrap();
    assert!(name.starts_with("separatrix-"), "{name}");
    let gc = std::fs::read_to_string(dir.join("gamma_c.csv")).unwrap();
    assert_eq!(gc, "gamma_c\n5.0000000000000000e-1\n");
    assert_eq!(header(&dir, "critical_points.csv"), "region,q,p,theta,phi,energy,lambda_c");
    assert_eq!(header(&dir, "separatrix.csv"), "omega_A,gamma_c");
}

#[test]
fn manifest_lists_every_file_with_checksum() {
    let out = scratch("manifest");
    let dir = run_ok(&out, &["reduce", "--config", &cfg("n4.cfg"), "--set", "N=6", "--set", "N=5"]);
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("command: reduce"));
    assert!(manifest.contains("overrides: N=5"));
    let listed: Vec<&str> = manifest.lines().skip_while(|l| *l != "files:").skip(1).collect();
    let mut on_disk: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.txt")
        .collect();
    on_disk.sort();
    let mut names: Vec<String> = listed.iter().map(|l| l.split_whitespace().nth(1).unwrap().to_string()).collect();
    names.sort();
    assert_eq!(names, on_disk);
    for l in listed {
        let sum = l.split_whitespace().next().unwrap();
        assert_eq!(sum.len(), 64);
        assert!(sum.chars().all(|c| c.is_ascii_hexdigit()));
    }
    assert!(std::fs::read_to_string(dir.join("model.cfg")).unwrap().contains("N = 5"));
    assert_eq!(header(&dir, "tree.csv").split(',').next(), Some("id"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let out = scratch("repeat");
    let args = ["scan", "--config", &cfg("xi.cfg"), "--axes", "mu12:0:1.5:0.25,mu23:0:2:0.5", "--solver", "exact"];
    let a = run_ok(&out, &args);
    let b = run_ok(&out, &args);
    assert_ne!(a, b);
    let pa = std::fs::read(a.join("phase.csv")).unwrap();
    assert_eq!(pa, std::fs::read(b.join("phase.csv")).unwrap());
    let text = String::from_utf8(pa).unwrap();
    assert!(text.lines().next().unwrap().starts_with("mu12,mu23,"));
    assert!(text.contains("M=0") && text.contains("M=2"));
}

#[test]
fn thread_count_comes_from_environment() {
    let out = scratch("threads");
    let o = Command::new(env!("CARGO_BIN_EXE_phasecart"))
        .args(["--out"])
        .arg(&out)
        .args(["reduce", "--config", &cfg("xi.cfg")])
        .env("PHASECART_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let dir = PathBuf::from(String::from_utf8(o.stdout).unwrap().trim());
    assert!(std::fs::read_to_string(dir.join("manifest.txt")).unwrap().contains("threads: 2"));
    let bad = Command::new(env!("CARGO_BIN_EXE_phasecart"))
        .arg("--out")
        .arg(&out)
        .args(["reduce", "--config", &cfg("xi.cfg")])
        .env("PHASECART_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let out = scratch("exit");
    assert_eq!(phasecart(&out, &["--help"]).status.code(), Some(0));
    assert_eq!(phasecart(&out, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(phasecart(&out, &["reduce", "--config", "/nonexistent.cfg"]).status.code(), Some(1));
    let o = phasecart(&out, &["reduce", "--config", &cfg("xi.cfg"), "--set", "mu=13:0.5"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let o = phasecart(&out, &["scan", "--config", &cfg("xi.cfg"), "--axes", "mu99:0:1:0.5"]);
    assert_eq!(o.status.code(), Some(1));
    // output root is a regular file
    std::fs::create_dir_all(&out).unwrap();
    let blocker = out.join("occupied");
    std::fs::write(&blocker, "").unwrap();
    let o = phasecart(&blocker, &["reduce", "--config", &cfg("xi.cfg")]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn basis_dimensions_are_ordered() {
    let out = scratch("basis");
    let dir = run_ok(&out, &["basis", "--config", &cfg("xi4.cfg"), "--order", "2", "--x", "1.5"]);
    let dims = std::fs::read_to_string(dir.join("dimensions.csv")).unwrap();
    let col: Vec<u64> = dims.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(col.len(), 4, "{dims}");
    assert!(col.windows(2).all(|w| w[0] < w[1]), "{dims}");
    assert_eq!(header(&dir, "cutoffs.csv"), "coupling,mode,x,m");
}

#[test]
fn fluctuation_sweep_schema() {
    let out = scratch("sweep");
    let dir = run_ok(&out, &["fluctuation", "--config", &cfg("tc.cfg"), "--set", "N=4", "--set", "cutoffs=20", "--axis", "gamma:0:1.5:0.5"]);
    assert_eq!(
        header(&dir, "sweep.csv"),
        "gamma,E_exact,E_coherent,E_sas,F_sas,F_coherent,nu_exact,dnu2_exact,dnu2_coherent,dnu2_sas,sector_exact,sector_sas"
    );
    assert_eq!(std::fs::read_to_string(dir.join("sweep.csv")).unwrap().lines().count(), 5);
}

#[test]
fn spectrum_and_surface() {
    let out = scratch("spectrum");
    let dir = run_ok(&out, &["spectrum", "--config", &cfg("dicke.cfg"), "--set", "N=4", "--set", "cutoffs=30", "--k", "2"]);
    assert_eq!(header(&dir, "spectrum.csv"), "sector,index,energy,residual,block_dim");
    let dir = run_ok(&out, &["surface", "--config", &cfg("dicke.cfg"), "--q", "-1:1:1", "--theta", "0:3:1.5"]);
    let s = std::fs::read_to_string(dir.join("surface.csv")).unwrap();
    assert_eq!(s.lines().next(), Some("q,theta,E"));
    assert_eq!(s.lines().count(), 1 + 3 * 3);
}
