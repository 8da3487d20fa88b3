//! In-process runs of the command line through [`run`].

use std::f64::consts::PI;

use tempfile::TempDir;

use super::*;

struct Csv {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        assert!(!text.contains('\r'), "LF line endings only");
        let mut lines = text.lines();
        let headers = lines
            .next()
            .expect("header row")
            .split(',')
            .map(String::from)
            .collect::<Vec<_>>();
        let rows = lines
            .map(|l| {
                l.split(',')
                    .map(|c| c.parse::<f64>().unwrap_or_else(|_| panic!("cell {c}")))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        assert!(rows.iter().all(|r| r.len() == headers.len()));
        Self { headers, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let j = self
            .headers
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[j]).collect()
    }

    fn nearest_row(&self, q: f64) -> usize {
        let qs = self.col("q");
        (0..qs.len())
            .min_by(|&a, &b| (qs[a] - q).abs().total_cmp(&(qs[b] - q).abs()))
            .unwrap()
    }
}

/// Run with `--out <dir>/<name>` and return the exit code and the file contents.
fn run_to(dir: &TempDir, name: &str, args: &[&str]) -> (u8, String) {
    let path = dir.path().join(name);
    let path = path.to_str().unwrap();
    let argv = std::iter::once("bernoulli")
        .chain(args.iter().copied())
        .chain(["--out", path]);
    let code = run(argv);
    (code, std::fs::read_to_string(path).unwrap_or_default())
}

fn csv_of(args: &[&str]) -> Csv {
    let dir = TempDir::new().unwrap();
    let (code, text) = run_to(&dir, "out.csv", args);
    assert_eq!(code, 0, "{args:?}");
    Csv::parse(&text)
}

fn code_of(args: &[&str]) -> u8 {
    let dir = TempDir::new().unwrap();
    run_to(&dir, "out.csv", args).0
}

#[test]
fn eigenfunctions_grid() {
    let csv = csv_of(&["eigenfunctions", "--nmax", "4", "--resolution", "200"]);
    assert_eq!(csv.headers, ["q", "psi_1", "psi_2", "psi_3", "psi_4"]);
    assert_eq!(csv.rows.len(), 200);
    let q = csv.col("q");
    assert_eq!(q[0], GRID_EPSILON);
    assert!((q[199] - (1.0 - GRID_EPSILON)).abs() < 1e-15);
    for row in [&csv.rows[0], &csv.rows[199]] {
        assert!(row[1..].iter().all(|v| v.abs() < 1e-3));
    }
    // Nearest grid point to ½ is off by Δq ≈ 1/398, i.e. Δθ ≈ 2Δq, so |Ψ₂| ≈ 4√(2/π)Δq ≈ 8e-3.
    let mid = csv.nearest_row(0.5);
    assert!(csv.col("psi_2")[mid].abs() < 1e-2);
}

#[test]
fn explicit_mode_list() {
    let csv = csv_of(&["eigenfunctions", "--modes", "2,7", "--resolution", "3"]);
    assert_eq!(csv.headers, ["q", "psi_2", "psi_7"]);
    assert_eq!(code_of(&["eigenfunctions", "--modes", "0"]), EXIT_USAGE);
}

#[test]
fn greens_columns() {
    let csv = csv_of(&["greens", "--resolution", "201"]);
    assert_eq!(csv.headers, ["q", "G_1/3", "G_1/2", "G_2/3"]);
    let mid = csv.nearest_row(0.5);
    assert!((csv.col("G_1/2")[mid] - PI / 4.0).abs() < 1e-6);
    assert!(csv.rows.iter().all(|r| r[1..].iter().all(|&g| g >= 0.0)));
}

#[test]
fn greens_symmetry_at_grid_points() {
    let qs = csv_of(&["eigenfunctions", "--nmax", "1", "--resolution", "7"]).col("q");
    let anchors: Vec<String> = qs[1..6].iter().map(|q| format!("{q:.17e}")).collect();
    let csv = csv_of(&[
        "greens",
        "--resolution",
        "7",
        "--qprimes",
        &anchors.join(","),
    ]);
    // Row i + 1 is q = qs[i + 1]; column j + 1 is q' = qs[j + 1].
    for i in 0..5 {
        for j in 0..5 {
            let (a, b) = (csv.rows[i + 1][j + 1], csv.rows[j + 1][i + 1]);
            assert!((a - b).abs() < 1e-14, "{i} {j}: {a} {b}");
        }
    }
}

#[test]
fn greens_series_matches_closed_form() {
    let closed = csv_of(&["greens", "--resolution", "9"]);
    let series = csv_of(&["greens", "--resolution", "9", "--terms", "10000"]);
    for (a, b) in closed.rows.iter().zip(&series.rows) {
        for j in 1..4 {
            assert!((a[j] - b[j]).abs() < 1e-3);
        }
    }
}

#[test]
fn greens_rejects_boundary_anchor() {
    assert_eq!(code_of(&["greens", "--qprimes", "1"]), EXIT_NUMERIC);
    assert_eq!(code_of(&["greens", "--qprimes", "a/b"]), EXIT_USAGE);
}

fn column_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn heat_evolution_columns() {
    let csv = csv_of(&[
        "evolve",
        "--kind",
        "heat",
        "--coeffs",
        "1,0.5,0.25",
        "--times",
        "0,0.1,0.5,2",
        "--resolution",
        "50",
    ]);
    assert_eq!(csv.headers, ["q", "t=0", "t=0.1", "t=0.5", "t=2"]);
    for (&q, &v) in csv.col("q").iter().zip(&csv.col("t=0")) {
        let t = 2.0 * q.sqrt().asin();
        let initial =
            (2.0 / PI).sqrt() * (t.sin() + 0.5 * (2.0 * t).sin() + 0.25 * (3.0 * t).sin());
        assert!((v - initial).abs() < 1e-14);
    }
    let norms: Vec<f64> = ["t=0", "t=0.1", "t=0.5", "t=2"]
        .iter()
        .map(|h| column_norm(&csv.col(h)))
        .collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
}

#[test]
fn heat_profiles_and_laws() {
    for initial in ["parabola", "tent", "mode:3"] {
        let csv = csv_of(&[
            "evolve",
            "--initial",
            initial,
            "--nmax",
            "16",
            "--resolution",
            "20",
            "--decay",
            "paper",
        ]);
        assert_eq!(csv.rows.len(), 20);
    }
    // The parabola is recovered at t = 0 to truncation accuracy.
    let csv = csv_of(&[
        "evolve",
        "--initial",
        "parabola",
        "--nmax",
        "64",
        "--resolution",
        "11",
        "--times",
        "0",
    ]);
    for (&q, &v) in csv.col("q").iter().zip(&csv.col("t=0")) {
        assert!((v - 4.0 * q * (1.0 - q)).abs() < 1e-3, "{q}: {v}");
    }
    assert_eq!(code_of(&["evolve", "--initial", "cubic"]), EXIT_USAGE);
    assert_eq!(code_of(&["evolve", "--times", "0,-1"]), EXIT_NUMERIC);
}

#[test]
fn wave_is_periodic_for_a_single_mode() {
    let csv = csv_of(&[
        "evolve",
        "--kind",
        "wave",
        "--coeffs",
        "1",
        "--times",
        "0,6.283185307179586",
        "--resolution",
        "40",
    ]);
    for row in &csv.rows {
        assert!((row[1] - row[2]).abs() < 1e-14);
    }
}

#[test]
fn oscillator_tables() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run_to(&dir, "levels.csv", &["oscillator", "--nmax", "12"]);
    assert_eq!(code, 0);
    let csv = Csv::parse(&text);
    assert_eq!(csv.headers, ["n", "E_exact", "E_approx", "E_asymptotic"]);
    assert_eq!(csv.rows.len(), 12);
    for row in &csv.rows {
        let n = row[0];
        assert_eq!(row[2], (n * n + 2.0 * n + 9.0) / 16.0);
        assert_eq!(row[3], n * n / 16.0);
        assert!(row[1] > row[3]);
    }
    assert!(csv.col("E_exact").windows(2).all(|w| w[1] > w[0]));
    assert!(text.lines().nth(1).unwrap().starts_with("1,"));

    let cond =
        Csv::parse(&std::fs::read_to_string(dir.path().join("levels_condition.csv")).unwrap());
    assert_eq!(cond.headers, ["E", "S_pi", "S_pi_scaled", "approx"]);
    assert_eq!(cond.rows.len(), 200);
    assert_eq!(cond.rows[0][0], 0.5);
    assert!(cond.col("approx").iter().all(|c| c.abs() <= 1.0));
}

#[test]
fn oscillator_condition_override() {
    let dir = TempDir::new().unwrap();
    let cond = dir.path().join("fig3.csv");
    let (code, _) = run_to(
        &dir,
        "levels.csv",
        &[
            "oscillator",
            "--nmax",
            "2",
            "--resolution",
            "4",
            "--condition-out",
            cond.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(
        Csv::parse(&std::fs::read_to_string(cond).unwrap())
            .rows
            .len(),
        4
    );
    assert!(!dir.path().join("levels_condition.csv").exists());
}

#[test]
fn oscillator_needs_centred_anchor() {
    assert_eq!(
        code_of(&["oscillator", "--qprime", "0.3", "--nmax", "2"]),
        EXIT_NUMERIC
    );
}

#[test]
fn json_uses_csv_field_names() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run_to(
        &dir,
        "levels.json",
        &[
            "oscillator",
            "--nmax",
            "3",
            "--resolution",
            "5",
            "--format",
            "json",
        ],
    );
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["n", "E_exact", "E_approx", "E_asymptotic"]);
    assert_eq!(rows[2]["E_approx"], 1.5);
    assert!(dir.path().join("levels_condition.json").exists());
}

#[test]
fn free_particle_levels() {
    let csv = csv_of(&["free-particle", "--m", "2", "--hbar", "0.5", "--nmax", "6"]);
    assert_eq!(csv.headers, ["n", "E_shooting", "E_exact", "rel_error"]);
    for row in &csv.rows {
        assert_eq!(row[2], 0.25 * row[0] * row[0] / 4.0);
        assert!(row[3] < 1e-8);
    }
}

#[test]
fn shoot_mathieu_matches_oscillator() {
    let shoot = csv_of(&["shoot", "--potential", "mathieu", "--nmax", "5"]);
    let osc = csv_of(&["oscillator", "--nmax", "5", "--resolution", "2"]);
    for (a, b) in shoot.col("E").iter().zip(osc.col("E_exact")) {
        assert!((a - b).abs() / b < 1e-8);
    }
    for potential in ["free", "kl_quadratic", "geodesic", "harmonic"] {
        assert_eq!(
            code_of(&["shoot", "--potential", potential, "--nmax", "3"]),
            0,
            "{potential}"
        );
    }
}

#[test]
fn free_trajectory_conserves_energy() {
    let csv = csv_of(&[
        "trajectory",
        "--potential",
        "free",
        "--q0",
        "0.5",
        "--p0",
        "1",
        "--t-end",
        "10",
    ]);
    assert_eq!(csv.headers, ["t", "q", "p", "H"]);
    let h = csv.col("H");
    assert!(h.iter().all(|x| (x - h[0]).abs() <= 1e-8 * h[0]));
    assert_eq!(*csv.col("t").last().unwrap(), 10.0);
}

#[test]
fn equilibrium_rows_are_constant() {
    let csv = csv_of(&[
        "trajectory",
        "--potential",
        "kl_quadratic",
        "--q0",
        "0.5",
        "--p0",
        "0",
        "--t-end",
        "5",
        "--dt",
        "0.5",
    ]);
    assert_eq!(csv.rows.len(), 11);
    for row in &csv.rows {
        assert_eq!(&row[1..], &[0.5, 0.0, 0.0]);
    }
}

#[test]
fn reversal_check_passes() {
    let args = [
        "trajectory",
        "--potential",
        "geodesic",
        "--q0",
        "0.7",
        "--p0",
        "0.5",
        "--dt",
        "1",
        "--check-reversal",
    ];
    assert_eq!(code_of(&args), 0);
}

#[test]
fn failed_check_sets_exit_code() {
    // A loose tolerance breaks the 1e-8 drift budget; the table is still written.
    let dir = TempDir::new().unwrap();
    let (code, text) = run_to(
        &dir,
        "t.csv",
        &[
            "trajectory",
            "--potential",
            "kl",
            "--q0",
            "0.9",
            "--tol",
            "1e-3",
        ],
    );
    assert_eq!(code, EXIT_CHECK);
    assert!(Csv::parse(&text).rows.len() > 2);
}

#[test]
fn boundary_escape_writes_partial_output() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run_to(
        &dir,
        "esc.csv",
        &[
            "trajectory",
            "--potential",
            "free",
            "--q0",
            "0.5",
            "--p0",
            "1",
            "--t-end",
            "100",
        ],
    );
    assert_ne!(code, 0);
    let csv = Csv::parse(&text);
    assert!(csv.rows.len() > 10);
    let last_t = *csv.col("t").last().unwrap();
    assert!(last_t > 20.0 && last_t < 100.0);
    assert!(csv.col("q").iter().all(|&q| q > 0.0 && q < 1.0));
}

#[test]
fn unwritable_path_fails() {
    assert_eq!(
        run([
            "bernoulli",
            "eigenfunctions",
            "--out",
            "/nonexistent-dir/eig.csv"
        ]),
        EXIT_IO
    );
}

#[test]
fn usage_errors() {
    assert_eq!(
        code_of(&["eigenfunctions", "--resolution", "1"]),
        EXIT_USAGE
    );
    assert_eq!(
        code_of(&["trajectory", "--potential", "spring"]),
        EXIT_USAGE
    );
    assert_eq!(code_of(&["nonsense"]), EXIT_USAGE);
    assert_eq!(code_of(&["free-particle", "--nmax", "0"]), EXIT_USAGE);
}

#[test]
fn global_flags_go_either_side_of_the_subcommand() {
    let a = csv_of(&["--m", "2", "free-particle", "--nmax", "3"]);
    let b = csv_of(&["free-particle", "--nmax", "3", "--m", "2"]);
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.col("E_exact")[2], 9.0 / 4.0);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["oscillator", "--nmax", "6", "--resolution", "30"];
    let (_, a) = run_to(&dir, "a.csv", &args);
    let (_, b) = run_to(&dir, "b.csv", &args);
    assert_eq!(a, b);
    let ca = std::fs::read(dir.path().join("a_condition.csv")).unwrap();
    let cb = std::fs::read(dir.path().join("b_condition.csv")).unwrap();
    assert_eq!(ca, cb);
}
