#![no_main]

use libfuzzer_sys::fuzz_target;
use seqwit::experiments::{run_scenario, ReportDocument, ScenarioConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = ScenarioConfig::from_json(text) else {
        return;
    };
    // keep each run cheap
    if config.m > 8 || config.n > 8 {
        return;
    }
    if let Ok(report) = run_scenario(&config) {
        let doc = ReportDocument::from_json(&report.to_json()).expect("own output parses");
        assert_eq!(doc, report.to_document());
    }
});
