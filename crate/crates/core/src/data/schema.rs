use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Feature,
    Sensitive,
    Label,
    /// Present in the file but not used.
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
    /// Raw value mapped to 1 for the sensitive and label columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_value: Option<String>,
}

/// Column metadata, read from a JSON sidecar `{"columns": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema: Schema = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        for (role, name) in [
            (ColumnRole::Sensitive, "sensitive"),
            (ColumnRole::Label, "label"),
        ] {
            let matches: Vec<_> = self.columns.iter().filter(|c| c.role == role).collect();
            if matches.len() != 1 {
                return Err(Error::SchemaRole(name));
            }
            if matches[0].positive_value.is_none() {
                return Err(Error::InvalidConfig(format!(
                    "{name} column `{}` needs a positive_value",
                    matches[0].name
                )));
            }
        }
        Ok(())
    }

    pub fn sensitive(&self) -> &ColumnSpec {
        self.columns
            .iter()
            .find(|c| c.role == ColumnRole::Sensitive)
            .expect("validated schema has a sensitive column")
    }

    pub fn label(&self) -> &ColumnSpec {
        self.columns
            .iter()
            .find(|c| c.role == ColumnRole::Label)
            .expect("validated schema has a label column")
    }

    pub fn features(&self) -> impl Iterator<Item = &ColumnSpec> {
        self.columns
            .iter()
            .filter(|c| c.role == ColumnRole::Feature)
    }
}
