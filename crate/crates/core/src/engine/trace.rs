use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::Result;

/// One round of training; accuracy and bias columns are percentages on the
/// test set, `loss` and `grad_norm` are on the training shards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub loss: f64,
    pub acc: f64,
    pub sp: Option<f64>,
    pub eop: Option<f64>,
    pub grad_norm: f64,
    pub signed_f: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<RoundRecord>,
}

impl TrainTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&RoundRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<TrainTrace> {
        let records = csv::Reader::from_reader(reader)
            .deserialize()
            .collect::<std::result::Result<Vec<RoundRecord>, _>>()?;
        Ok(TrainTrace { records })
    }
}
