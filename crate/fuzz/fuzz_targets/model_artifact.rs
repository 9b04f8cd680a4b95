#![no_main]

use dupwatch_core::TfidfModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = TfidfModel::from_artifact_bytes(data) {
        let bytes = model.to_artifact_bytes();
        assert_eq!(TfidfModel::from_artifact_bytes(&bytes).unwrap(), model);
        for i in 0..model.n_docs() {
            let _ = model.scores(model.doc_vector(i));
        }
    }
});
