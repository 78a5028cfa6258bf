#![no_main]

use libfuzzer_sys::fuzz_target;
use seqwit::experiments::ReportDocument;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = ReportDocument::from_json(text) {
        let again = ReportDocument::from_json(&doc.to_json()).expect("accepted document re-parses");
        assert_eq!(again, doc);
    }
});
