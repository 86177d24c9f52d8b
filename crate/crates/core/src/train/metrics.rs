use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "epoch,train_loss,val_loss,train_acc,val_acc,lr,seconds";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    /// NaN when no validation set was given.
    #[serde(with = "nan_as_null")]
    pub val_loss: f64,
    pub train_acc: f64,
    #[serde(with = "nan_as_null")]
    pub val_acc: f64,
    pub lr: f64,
    pub seconds: f64,
}

impl EpochMetrics {
    /// CSV row without line ending. Floats use the shortest round-trip form.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.epoch, self.train_loss, self.val_loss, self.train_acc, self.val_acc, self.lr, self.seconds
        )
    }
}

/// JSON has no NaN; store it as `null`.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

pub fn write_metrics<W: Write>(mut w: W, rows: &[EpochMetrics]) -> Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a metrics CSV written by [`write_metrics`].
pub fn read_metrics<R: BufRead>(r: R) -> Result<Vec<EpochMetrics>> {
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim_end() == METRICS_HEADER => {}
        Some((_, Err(e))) => return Err(e.into()),
        _ => return Err(Error::Parse { line: 1, message: format!("expected header '{METRICS_HEADER}'") }),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: idx + 1, message };
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 7 {
            return Err(bad(format!("expected 7 fields, got {}", fields.len())));
        }
        let num = |k: usize| fields[k].parse::<f64>().map_err(|e| bad(format!("field {}: {e}", k + 1)));
        rows.push(EpochMetrics {
            epoch: fields[0].parse().map_err(|e| bad(format!("epoch: {e}")))?,
            train_loss: num(1)?,
            val_loss: num(2)?,
            train_acc: num(3)?,
            val_acc: num(4)?,
            lr: num(5)?,
            seconds: num(6)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rows = vec![
            EpochMetrics {
                epoch: 0,
                train_loss: 0.693,
                val_loss: 0.6,
                train_acc: 0.5,
                val_acc: 0.55,
                lr: 1e-4,
                seconds: 0.0,
            },
            EpochMetrics { epoch: 1, train_loss: 0.1 + 0.2, val_loss: f64::NAN, ..rows_default() },
        ];
        let mut buf = Vec::new();
        write_metrics(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("epoch,train_loss,val_loss,train_acc,val_acc,lr,seconds\n0,"));
        let back = read_metrics(buf.as_slice()).unwrap();
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[1].train_loss, 0.1 + 0.2);
        assert!(back[1].val_loss.is_nan());
    }

    fn rows_default() -> EpochMetrics {
        EpochMetrics { epoch: 0, train_loss: 0.0, val_loss: 0.0, train_acc: 0.0, val_acc: 0.0, lr: 0.0, seconds: 0.0 }
    }

    #[test]
    fn nan_survives_json() {
        let row = EpochMetrics { val_loss: f64::NAN, val_acc: f64::NAN, ..rows_default() };
        let back: EpochMetrics = serde_json::from_str(&serde_json::to_string(&row).unwrap()).unwrap();
        assert!(back.val_loss.is_nan() && back.val_acc.is_nan());
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_metrics("a,b\n".as_bytes()).is_err());
        let text = format!("{METRICS_HEADER}\n0,1,2\n");
        assert!(matches!(read_metrics(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
