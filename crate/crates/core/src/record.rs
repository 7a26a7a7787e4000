use crate::error::{Error, Result};
use crate::lead::{Label, LeadId};

/// A 12-lead ECG record with amplitudes in millivolts.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgRecord {
    pub record_id: String,
    pub label: Label,
    sample_rate_hz: f64,
    leads: Vec<Vec<f64>>,
}

impl EcgRecord {
    /// Builds a record from leads given in canonical [`LeadId::ALL`] order.
    ///
    /// Requires 12 equal-length leads covering at least two seconds.
    pub fn new(
        record_id: impl Into<String>,
        label: Label,
        sample_rate_hz: f64,
        leads: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if leads.len() != LeadId::ALL.len() {
            return Err(Error::LeadCountMismatch(leads.len()));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidRecord(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let len = leads[0].len();
        if let Some((i, l)) = leads.iter().enumerate().find(|(_, l)| l.len() != len) {
            return Err(Error::InvalidRecord(format!(
                "lead {} has {} samples, lead I has {len}",
                LeadId::ALL[i],
                l.len()
            )));
        }
        if (len as f64) < 2.0 * sample_rate_hz {
            return Err(Error::InvalidRecord(format!(
                "{len} samples at {sample_rate_hz} Hz is shorter than 2 s"
            )));
        }
        Ok(Self {
            record_id: record_id.into(),
            label,
            sample_rate_hz,
            leads,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn duration_samples(&self) -> usize {
        self.leads[0].len()
    }

    pub fn lead(&self, lead: LeadId) -> &[f64] {
        &self.leads[lead.index()]
    }

    pub fn leads(&self) -> impl Iterator<Item = (LeadId, &[f64])> {
        LeadId::ALL
            .iter()
            .copied()
            .zip(self.leads.iter().map(Vec::as_slice))
    }

    /// Applies `f` to every lead, keeping metadata.
    pub fn map_leads<F>(&self, mut f: F) -> Result<EcgRecord>
    where
        F: FnMut(LeadId, &[f64]) -> Result<Vec<f64>>,
    {
        let leads = self
            .leads()
            .map(|(id, s)| f(id, s))
            .collect::<Result<Vec<_>>>()?;
        EcgRecord::new(self.record_id.clone(), self.label, self.sample_rate_hz, leads)
    }
}
