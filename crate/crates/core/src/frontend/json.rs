//! JSON serialization of the canonical model.
//!
//! The schema is the serde representation of [`MiblpInstance`]: dense
//! matrices as arrays of rows, `>=` rows, minimization at both levels,
//! integer variables first. `name`, `interdiction`, `x_names` and `y_names`
//! may be omitted.

use std::path::Path;

use super::{read_file, write_file, FrontendError};
use crate::model::MiblpInstance;

pub fn from_json_str(text: &str) -> Result<MiblpInstance, FrontendError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let inst: MiblpInstance = serde_path_to_error::deserialize(de).map_err(|e| FrontendError::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    inst.validate()?;
    Ok(inst)
}

pub fn to_json_string(inst: &MiblpInstance) -> String {
    serde_json::to_string_pretty(inst).expect("instance serializes")
}

pub fn parse_json(path: &Path) -> Result<MiblpInstance, FrontendError> {
    from_json_str(&read_file(path)?)
}

pub fn write_json(inst: &MiblpInstance, path: &Path) -> Result<(), FrontendError> {
    write_file(path, &to_json_string(inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{knapsack_interdiction_toy, moore_bard};

    #[test]
    fn round_trips() {
        for inst in [moore_bard(), knapsack_interdiction_toy()] {
            assert_eq!(from_json_str(&to_json_string(&inst)).unwrap(), inst);
        }
    }

    #[test]
    fn malformed_field_reports_path() {
        let text = to_json_string(&moore_bard()).replace("\"b2\": [", "\"b2\": [\"oops\", ");
        match from_json_str(&text) {
            Err(FrontendError::Json { path, .. }) => assert!(path.starts_with("b2"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_linking_rejected() {
        let mut inst = moore_bard();
        inst.linking = vec![];
        let text = to_json_string(&inst);
        assert!(matches!(from_json_str(&text), Err(FrontendError::Model(_))));
    }
}
