use chrono::{Datelike, Months};
use serde::{Deserialize, Serialize};

use super::RiskError;
use crate::graph::Date;

/// Half-open date interval `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DateInterval {
    pub start: Date,
    pub end: Date,
}

impl DateInterval {
    pub fn contains(&self, d: Date) -> bool {
        self.start <= d && d < self.end
    }
}

/// One step of the rolling protocol: fit on features at the end of `train`
/// with labels from `observe`, score features at the end of `observe`
/// (`predict` is the same interval), check against `evaluate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowTuple {
    pub index: usize,
    pub train: DateInterval,
    pub observe: DateInterval,
    pub predict: DateInterval,
    pub evaluate: DateInterval,
}

impl WindowTuple {
    /// Features for training are taken just before this date.
    pub fn train_cutoff(&self) -> Date {
        self.train.end
    }

    /// Features for scoring are taken just before this date; it is also
    /// the last date the fitted model may depend on.
    pub fn predict_cutoff(&self) -> Date {
        self.observe.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub width_months: u32,
    pub stride_months: u32,
    pub tuples: Vec<WindowTuple>,
}

fn add(d: Date, months: u32) -> Date {
    d.checked_add_months(Months::new(months)).expect("date in range")
}

/// Tuples of consecutive windows of `width_months`, advancing by
/// `stride_months`, that fit inside the inclusive span. Windows start on the
/// first of a month, and on a quarter boundary when the width is three months.
pub fn build_windows(span: (Date, Date), width_months: u32, stride_months: u32) -> Result<WindowPlan, RiskError> {
    if width_months == 0 || stride_months == 0 {
        return Err(RiskError::InvalidWindow { width_months, stride_months });
    }
    let (first, last) = span;
    let mut month0 = first.month0();
    if width_months == 3 {
        month0 -= month0 % 3;
    }
    let origin = Date::from_ymd_opt(first.year(), month0 + 1, 1).expect("valid month");
    let stop = last.succ_opt().unwrap_or(last);
    if add(origin, stride_months) > stop {
        return Err(RiskError::SpanTooShort { from: first, to: last });
    }
    let mut tuples = Vec::new();
    loop {
        let a = add(origin, stride_months * tuples.len() as u32);
        let w = |k: u32| DateInterval { start: add(a, k * width_months), end: add(a, (k + 1) * width_months) };
        let (train, observe, evaluate) = (w(0), w(1), w(2));
        if evaluate.end > stop {
            break;
        }
        tuples.push(WindowTuple { index: tuples.len(), train, observe, predict: observe, evaluate });
    }
    if tuples.is_empty() {
        return Err(RiskError::SpanTooShort { from: first, to: last });
    }
    Ok(WindowPlan { width_months, stride_months, tuples })
}
