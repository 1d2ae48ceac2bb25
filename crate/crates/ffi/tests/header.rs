use std::path::Path;
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/uwbsync.h");

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(HEADER).unwrap();
    for name in [
        "typedef struct UwbScenario UwbScenario;",
        "typedef struct UwbMetrics UwbMetrics;",
        "UWB_STATUS_OK = 0",
        "UWB_STATUS_PANIC = 7",
        "uwb_scenario_from_file(",
        "uwb_scenario_from_str(",
        "uwb_scenario_bundled(",
        "uwb_scenario_set_seed(",
        "uwb_scenario_set_trials(",
        "uwb_scenario_set_snr_points(",
        "uwb_scenario_emit(",
        "uwb_sweep(",
        "uwb_run_trial(",
        "uwb_metrics_len(",
        "uwb_metrics_row(",
        "uwb_metrics_write_csv(",
        "uwb_metrics_free(",
        "uwb_scenario_free(",
        "uwb_string_free(",
        "uwb_last_error_message(",
        "uwb_version(",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping header compile check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"uwbsync.h\"\n\
         int main(void) {\n\
           UwbScenario *s = 0;\n\
           UwbStatus st = uwb_scenario_bundled(\"desk\", &s);\n\
           UwbMetricsRow row; (void)row;\n\
           return st == UWB_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = Path::new(HEADER).parent().unwrap();
    for lang in ["c", "c++"] {
        let out = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I"])
            .arg(include)
            .arg(&src)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
