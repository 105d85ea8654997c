use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const LETAC: &str = "\
[model]
family = letac  # the bounded-support example
[distributions.a]
kind = discrete
values = 1/3, 2
probabilities = 3/4, 1/4
[distributions.b]
kind = constant
value = 1/2
[distributions.c]
kind = constant
value = -1
[experiment]
seed = 1
count = 2000
";

const EXTREMAL: &str = "\
[model]
family = extremal
[distributions.a]
kind = lognormal
meanlog = -0.75
sdlog = 1
[distributions.b]
kind = constant
value = 1
[experiment]
seed = 3
count = 20000
n = 500
replicas = 500
mean_count = 5000
draws = 5000
theta_draws = 20
";

struct Run {
    out: PathBuf,
    output: Output,
    _tmp: tempfile::TempDir,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().unwrap()
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn header(&self, name: &str) -> String {
        self.read(name).lines().next().unwrap().to_string()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.output.stderr).into_owned()
    }
}

fn lipmaps(verb: &str, cfg: &str, extra: &[&str]) -> Run {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("run.cfg");
    std::fs::write(&path, cfg).unwrap();
    let out = tmp.path().join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_lipmaps"))
        .args([verb, "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run { out, output, _tmp: tmp }
}

fn manifest_digest(dir: &Path) -> String {
    let text = std::fs::read_to_string(dir.join("manifest.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    first["config_digest"].as_str().unwrap().to_string()
}

#[test]
fn letac_cramer_reports_the_exponent() {
    let r = lipmaps("cramer", LETAC, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert_eq!(r.header("cramer.csv"), "s,kappa,se");
    let summary = r.read("cramer_summary.csv");
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    let alpha: f64 = row[0].parse().unwrap();
    assert!((alpha - 1.851).abs() < 1e-3, "{alpha}");
    assert_eq!(row[3], "closed_form");
}

#[test]
fn letac_support_is_two_points() {
    let r = lipmaps("support", LETAC, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let text = r.read("support.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,depth"));
    let mut xs: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    assert_eq!(xs.len(), 2);
    assert!((xs[0] + 5.0 / 6.0).abs() < 1e-9 && xs[1].abs() < 1e-9, "{xs:?}");
    let cov = r.read("support_coverage.csv");
    assert!(cov.lines().nth(1).unwrap().split(',').nth(2) == Some("1"));
}

#[test]
fn zero_count_is_rejected_before_writing() {
    let r = lipmaps("simulate", &LETAC.replace("count = 2000", "count = 0"), &[]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("count"), "{}", r.stderr());
    assert!(!r.out.exists());
}

#[test]
fn exit_codes() {
    let unknown = lipmaps("cramer", &LETAC.replace("family = letac", "family = logistic"), &[]);
    assert_eq!(unknown.code(), 2, "{}", unknown.stderr());
    assert!(unknown.stderr().contains("line 2"), "{}", unknown.stderr());

    let bad = lipmaps("cramer", &LETAC.replace("3/4, 1/4", "0.6, 0.3"), &[]);
    assert_eq!(bad.code(), 2);
    assert!(bad.stderr().contains("probabilities must sum to 1"), "{}", bad.stderr());

    // two atoms need the non-arithmetic assertion
    let flag = lipmaps("tail", LETAC, &[]);
    assert_eq!(flag.code(), 5, "{}", flag.stderr());
    assert!(!flag.out.join("tail_survival.csv").exists());

    let capacity = lipmaps("support", &format!("{LETAC}depth = 40\n"), &[]);
    assert_eq!(capacity.code(), 4, "{}", capacity.stderr());

    let convergence = lipmaps("simulate", &format!("{EXTREMAL}max_depth = 2\ntol = 1e-12\n"), &[]);
    assert_eq!(convergence.code(), 3, "{}", convergence.stderr());
    assert!(
        convergence.stderr().contains("stage 'sampling'"),
        "{}",
        convergence.stderr()
    );
}

#[test]
fn csv_headers() {
    let tail = lipmaps("tail", EXTREMAL, &[]);
    assert_eq!(tail.code(), 0, "{}", tail.stderr());
    assert_eq!(tail.header("tail_survival.csv"), "t,p_hat,t_alpha_p");
    assert_eq!(tail.header("hill.csv"), "k,alpha_hat");
    assert_eq!(tail.header("goldie.csv"), "C,se,alpha,m_alpha");
    assert!(tail.read("tail_survival.svg").starts_with("<svg"));

    let limit = lipmaps("limit", &format!("{EXTREMAL}compare_n = 100\n"), &[]);
    assert_eq!(limit.code(), 0, "{}", limit.stderr());
    assert_eq!(limit.header("cf.csv"), "t,v_index,re,im,se");
    assert_eq!(limit.header("cf_compare.csv"), "t,v_index,re,im,se");
    assert_eq!(limit.header("limit_samples.csv"), "replica,value");
    assert_eq!(limit.read("limit_samples.csv").lines().count(), 501);
    assert_eq!(limit.read("cf.csv").lines().count(), 9);

    let sim = lipmaps("simulate", EXTREMAL, &[]);
    assert_eq!(sim.header("stationary.csv"), "replica,x1,depth,bound");

    let check = lipmaps("check", EXTREMAL, &[]);
    assert_eq!(check.code(), 0, "{}", check.stderr());
    assert_eq!(check.header("checks.csv"), "check,value,se,pass");
}

#[test]
fn two_dimensional_support_columns() {
    let cfg = "\
[model]
family = affine
dimension = 2
[distributions.a]
kind = discrete
values = 0.5
probabilities = 1
[distributions.angle]
kind = discrete
values = 0, 1.5707963267948966
probabilities = 1/2, 1/2
[distributions.b1]
kind = discrete
values = 0, 1
probabilities = 1/2, 1/2
[distributions.b2]
kind = constant
value = 0
[experiment]
depth = 4
count = 500
";
    let r = lipmaps("support", cfg, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert_eq!(r.header("support.csv"), "x1,x2,depth");
}

#[test]
fn formats_select_outputs() {
    let r = lipmaps("tail", &format!("{EXTREMAL}[output]\nformats = csv\n"), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert!(r.out.join("hill.csv").exists());
    assert!(!r.out.join("hill.svg").exists());
    assert!(!r.out.join("manifest.jsonl").exists());
}

#[test]
fn manifest_digest_tracks_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("run.cfg");
    let out = tmp.path().join("fixed");
    let digest_of = |cfg: &str, extra: &[&str]| {
        std::fs::write(&path, cfg).unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_lipmaps"))
            .args(["cramer", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .args(extra)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        manifest_digest(&out)
    };
    let base = digest_of(LETAC, &[]);
    let csv = std::fs::read(out.join("cramer.csv")).unwrap();
    assert_eq!(base, digest_of(LETAC, &[]));
    assert_eq!(csv, std::fs::read(out.join("cramer.csv")).unwrap());
    assert_eq!(
        base,
        digest_of(&LETAC.replace("# the bounded-support example", ""), &[])
    );
    assert_ne!(base, digest_of(LETAC, &["--seed", "2"]));
    assert_ne!(base, digest_of(&LETAC.replace("value = 1/2", "value = 0.25"), &[]));
    assert_ne!(base, digest_of(&format!("{LETAC}draws = 1000\n"), &[]));
}
