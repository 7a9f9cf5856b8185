//! CSV artifacts. Every file starts with one `#` comment line carrying
//! enough provenance to re-run the experiment that produced it.

use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::capacity::{CapacityResult, SweepTable};
use crate::config::SwitchConfig;
use crate::matching::Matching;
use crate::sim::{DriftBin, SimTrace};

#[derive(Debug, Clone)]
pub struct Provenance {
    /// Command that produced the file, e.g. `simulate` or `preset fig2`.
    pub command: String,
    pub config: SwitchConfig,
    pub fields: Vec<(String, String)>,
    /// Append a wall-clock timestamp; off by default so outputs stay
    /// byte-identical across invocations.
    pub stamp: bool,
}

impl Provenance {
    pub fn new(command: impl Into<String>, config: &SwitchConfig) -> Self {
        Provenance {
            command: command.into(),
            config: config.clone(),
            fields: Vec::new(),
            stamp: false,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn comment(&self) -> String {
        let c = &self.config;
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        let links = c
            .types
            .iter()
            .map(|t| t.links.iter().map(usize::to_string).collect::<Vec<_>>().join("+"))
            .collect::<Vec<_>>()
            .join(";");
        let q: Vec<f64> = c.types.iter().map(|t| t.q).collect();
        let mut line = format!(
            "# qswitch {} config_hash={} arrivals={}",
            self.command,
            c.hash(),
            c.arrivals.distribution
        );
        for (k, v) in &self.fields {
            line.push_str(&format!(" {k}={v}"));
        }
        line.push_str(&format!(
            " p={} q={} links={} rates={}",
            join(&c.links.p),
            join(&q),
            links,
            join(&c.arrivals.rates)
        ));
        if self.stamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            line.push_str(&format!(" unix_time={secs}"));
        }
        line
    }
}

fn numbered(prefix: &str, m: usize) -> String {
    (1..=m).map(|i| format!("{prefix}_{i}")).collect::<Vec<_>>().join(",")
}

fn join_u64(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// `slot,Q_1..Q_M,qbar,cumdep_1..cumdep_M`, one row per recorded snapshot.
pub fn write_trace<W: Write + ?Sized>(w: &mut W, prov: &Provenance, trace: &SimTrace) -> io::Result<()> {
    let m = trace.cumulative_departures.len();
    writeln!(w, "{}", prov.comment())?;
    writeln!(w, "slot,{},qbar,{}", numbered("Q", m), numbered("cumdep", m))?;
    for snap in &trace.queue_series {
        let qbar = snap.queues.iter().map(|&q| q as f64).sum::<f64>() / m as f64;
        writeln!(
            w,
            "{},{},{},{}",
            snap.slot,
            join_u64(&snap.queues),
            qbar,
            join_u64(&snap.cumulative_departures)
        )?;
    }
    Ok(())
}

/// `seed,horizon,mean_qbar,deprate_1..deprate_M,mean_qbar_2h`, one row per run.
/// The last column averages only the second half of the horizon.
pub fn write_summary<W: Write + ?Sized>(w: &mut W, prov: &Provenance, traces: &[SimTrace]) -> io::Result<()> {
    let m = traces.first().map_or(0, |t| t.cumulative_departures.len());
    writeln!(w, "{}", prov.comment())?;
    writeln!(w, "seed,horizon,mean_qbar,{},mean_qbar_2h", numbered("deprate", m))?;
    for t in traces {
        writeln!(
            w,
            "{},{},{},{},{}",
            t.seed,
            t.horizon,
            t.mean_qbar,
            join_f64(&t.departure_rates()),
            t.mean_qbar_second_half
        )?;
    }
    Ok(())
}

/// `norm_lo,norm_hi,count,mean_drift`; empty bins leave `mean_drift` blank.
pub fn write_drift<W: Write + ?Sized>(w: &mut W, prov: &Provenance, bins: &[DriftBin]) -> io::Result<()> {
    writeln!(w, "{}", prov.comment())?;
    writeln!(w, "norm_lo,norm_hi,count,mean_drift")?;
    for b in bins {
        let mean = b.mean_drift.map(|d| d.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{}", b.lower, b.upper, b.count, mean)?;
    }
    Ok(())
}

pub fn write_capacity<W: Write + ?Sized>(w: &mut W, prov: &Provenance, result: &CapacityResult) -> io::Result<()> {
    writeln!(w, "{}", prov.comment())?;
    writeln!(w, "rho_star,verdict")?;
    writeln!(w, "{},{}", result.rho_star, result.verdict)
}

/// `state_mask,pi_1..pi_M,b`; bit `j` of the mask is link `j`.
pub fn write_witness<W: Write + ?Sized>(w: &mut W, prov: &Provenance, result: &CapacityResult, m: usize) -> io::Result<()> {
    writeln!(w, "{}", prov.comment())?;
    writeln!(w, "state_mask,{},b", numbered("pi", m))?;
    for e in &result.witness {
        writeln!(w, "{},{},{}", e.state_mask, e.matching, e.weight)?;
    }
    Ok(())
}

/// `value,rho_star,verdict`; failed points carry the error in the verdict
/// column and leave `rho_star` blank. The bracketed crossing, if any, goes
/// in a trailing comment.
pub fn write_sweep<W: Write + ?Sized>(w: &mut W, prov: &Provenance, table: &SweepTable) -> io::Result<()> {
    writeln!(w, "{}", prov.comment())?;
    writeln!(w, "value,rho_star,verdict")?;
    for p in &table.points {
        match &p.result {
            Ok(r) => writeln!(w, "{},{},{}", p.value, r.rho_star, r.verdict)?,
            Err(e) => writeln!(w, "{},,error: {}", p.value, e.to_string().replace(',', ";"))?,
        }
    }
    match table.crossing {
        Some(c) => writeln!(w, "# crossing={c}"),
        None => writeln!(w, "# crossing=none"),
    }
}

pub fn write_matchings<W: Write + ?Sized>(w: &mut W, prov: &Provenance, matchings: &[Matching], m: usize) -> io::Result<()> {
    writeln!(w, "{}", prov.comment())?;
    writeln!(w, "{}", numbered("pi", m))?;
    for pi in matchings {
        writeln!(w, "{pi}")?;
    }
    Ok(())
}
