use std::process::{Command, Output};

use mpcolor::harness::{parse_report, Format};
use mpcolor::io;

fn mpcolor(args: &[&str], out_dir: Option<&std::path::Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mpcolor"));
    cmd.args(args).env_remove("MPCOLOR_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("MPCOLOR_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn gen_writes_a_parseable_planted_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcolor(
        &[
            "gen", "--n", "90", "--d", "12", "--seed", "4", "-o", "g.txt",
        ],
        Some(dir.path()),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let file =
        io::parse_graph(&std::fs::read_to_string(dir.path().join("g.txt")).unwrap()).unwrap();
    assert_eq!(file.graph.n(), 90);
    assert!(mpcolor::graph::is_proper(
        &file.graph,
        &file.coloring.unwrap()
    ));
}

#[test]
fn gen_code_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    let out = mpcolor(
        &[
            "gen",
            "--kind",
            "code",
            "--n",
            "48",
            "-o",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    let code = io::parse_code(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!((code.n(), code.s(), code.t()), (48, 3, 6));
}

#[test]
fn color_gallager_file_mode_repairs_the_planted_start() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let colored = dir.path().join("out.txt");
    assert!(mpcolor(
        &["gen", "--n", "300", "--d", "40", "-o", g.to_str().unwrap()],
        None
    )
    .status
    .success());
    let out = mpcolor(
        &[
            "color-gallager",
            "--input",
            g.to_str().unwrap(),
            "-o",
            colored.to_str().unwrap(),
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let file = io::parse_graph(&std::fs::read_to_string(colored).unwrap()).unwrap();
    let phi = file.coloring.unwrap();
    assert!(phi.is_complete() && mpcolor::graph::is_proper(&file.graph, &phi));
}

#[test]
fn sweep_report_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcolor(
        &[
            "sweep",
            "--mode",
            "ldpc",
            "--n",
            "240",
            "--epsilon",
            "0.01",
            "--seed-count",
            "3",
            "--format",
            "csv",
            "-o",
            "r.csv",
        ],
        Some(dir.path()),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(parse_report(&text, Format::Csv).unwrap().len(), 3);
    assert!(dir.path().join("r.csv.aggregate.json").exists());
}

#[test]
fn failing_seeds_give_exit_code_one() {
    // far above any decodable noise level
    let out = mpcolor(
        &["ldpc", "--n", "120", "--epsilon", "0.4", "--no-timing"],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_parameters_give_exit_code_two() {
    let out = mpcolor(&["color-gallager", "--n", "30", "--epsilon", "2"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let run = |threads: &str| {
        let out = mpcolor(
            &[
                "--threads",
                threads,
                "structure",
                "--n",
                "600",
                "--d",
                "60",
                "--seed-count",
                "6",
                "--no-timing",
            ],
            None,
        );
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}
