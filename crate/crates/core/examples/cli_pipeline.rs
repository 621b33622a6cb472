//! Runs a small CLI pipeline in-process into a temporary directory and
//! prints the manifest of the last step.
use std::path::Path;

fn step(out: &Path, args: &[&str]) {
    let mut argv = vec!["maxdir".to_string(), "--out".into(), out.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let code = maxdir::cli::run(argv);
    assert_eq!(code, 0, "{args:?}");
}

fn main() {
    let root = std::env::temp_dir().join(format!("maxdir-pipeline-{}", std::process::id()));
    let p = |d: &str, f: &str| root.join(d).join(f).display().to_string();
    step(&root.join("dirs"), &["dirs", "gen", "--family", "cantor", "--q", "3", "--n", "3"]);
    step(&root.join("field"), &["field", "gen", "--kind", "ball", "--n", "128"]);
    step(&root.join("max"), &["op", "maximal", "--field", &p("field", "field.dsf1"), "--dirs", &p("dirs", "directions.json"), "--modulus"]);
    println!("{}", std::fs::read_to_string(root.join("max").join("manifest.json")).unwrap());
    std::fs::remove_dir_all(&root).unwrap();
}
