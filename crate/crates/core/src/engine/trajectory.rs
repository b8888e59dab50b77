use std::io::{self, Read, Write};

use serde::Serialize;

use crate::Regime;

/// Why a sample was recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum SampleKind {
    Start = 0,
    Grid = 1,
    Jump = 2,
}

impl SampleKind {
    fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(SampleKind::Start),
            1 => Some(SampleKind::Grid),
            2 => Some(SampleKind::Jump),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SampleKind::Start => "start",
            SampleKind::Grid => "grid",
            SampleKind::Jump => "jump",
        }
    }
}

/// One regime switch: time, endpoints and the absolute mark that selected it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpRecord {
    pub time: f64,
    pub from: Regime,
    pub to: Regime,
    pub mark: f64,
}

/// A simulated path of `(X, L)`.
///
/// Samples are stored column-wise; `xs` holds `dim` values per sample.
/// In summary mode only the endpoint, the markers, the running maxima and
/// the jump log are kept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    pub regimes: Vec<Regime>,
    pub xs: Vec<f64>,
    pub kinds: Vec<SampleKind>,
    pub jumps: Vec<JumpRecord>,
    pub start_time: f64,
    pub final_time: f64,
    pub final_x: Vec<f64>,
    pub final_regime: Regime,
    /// First switch time; `None` means no switch up to the horizon.
    pub eta: Option<f64>,
    /// First time `|X| + L > K` at grid or event resolution.
    pub tau: Option<f64>,
    pub tau_level: Option<usize>,
    /// `sup |X_s|` over recorded times.
    pub sup_norm: f64,
    pub sup_regime: Regime,
    pub steps: usize,
    /// Steps where `dt * q_i(x)` exceeded 0.1.
    pub stiff_steps: usize,
}

impl Trajectory {
    pub(crate) fn empty(dim: usize, t0: f64, x0: &[f64], i0: Regime, tau_level: Option<usize>) -> Self {
        Self {
            dim,
            times: Vec::new(),
            regimes: Vec::new(),
            xs: Vec::new(),
            kinds: Vec::new(),
            jumps: Vec::new(),
            start_time: t0,
            final_time: t0,
            final_x: x0.to_vec(),
            final_regime: i0,
            eta: None,
            tau: None,
            tau_level,
            sup_norm: crate::regime_graph::norm(x0),
            sup_regime: i0,
            steps: 0,
            stiff_steps: 0,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: &[f64], i: Regime, kind: SampleKind) {
        self.times.push(t);
        self.regimes.push(i);
        self.xs.extend_from_slice(x);
        self.kinds.push(kind);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn x(&self, k: usize) -> &[f64] {
        &self.xs[k * self.dim..(k + 1) * self.dim]
    }

    /// Regime at time `t` from the jump log (right-continuous).
    pub fn regime_at(&self, t: f64) -> Regime {
        let initial = self.jumps.first().map_or(self.final_regime, |j| j.from);
        self.jumps.iter().take_while(|j| j.time <= t).last().map_or(initial, |j| j.to)
    }

    /// `X_t` by linear interpolation between recorded samples (full mode).
    pub fn x_at(&self, t: f64) -> Option<Vec<f64>> {
        if self.is_empty() || t < self.times[0] || t > *self.times.last()? {
            return None;
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k == self.len() {
            return Some(self.x(k - 1).to_vec());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        Some(self.x(k - 1).iter().zip(self.x(k)).map(|(a, b)| a + w * (b - a)).collect())
    }

    /// Equality of every float by bit pattern.
    pub fn bitwise_eq(&self, other: &Trajectory) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        let opt = |v: Option<f64>| v.map(f64::to_bits);
        self.dim == other.dim
            && bits(&self.times) == bits(&other.times)
            && self.regimes == other.regimes
            && bits(&self.xs) == bits(&other.xs)
            && self.kinds == other.kinds
            && self.jumps.len() == other.jumps.len()
            && self.jumps.iter().zip(&other.jumps).all(|(a, b)| {
                a.time.to_bits() == b.time.to_bits() && a.from == b.from && a.to == b.to && a.mark.to_bits() == b.mark.to_bits()
            })
            && bits(&self.final_x) == bits(&other.final_x)
            && self.final_regime == other.final_regime
            && self.final_time.to_bits() == other.final_time.to_bits()
            && opt(self.eta) == opt(other.eta)
            && opt(self.tau) == opt(other.tau)
            && self.sup_norm.to_bits() == other.sup_norm.to_bits()
            && self.sup_regime == other.sup_regime
    }

    /// Write the compact binary log.
    ///
    /// Header: magic `RSDTRAJ1`, format version (u32), seed (u64), 32-byte
    /// config hash, dimension (u32). Then records, each a u32 byte length
    /// followed by a tag byte and payload, all little-endian:
    /// tag 0 sample `t f64, regime u64, kind u8, x [f64; dim]`;
    /// tag 1 jump `t f64, from u64, to u64, mark f64`;
    /// tag 2 marker `id u8 (0 = eta, 1 = tau), t f64`.
    pub fn write_binary<W: Write>(&self, mut w: W, seed: u64, config_hash: &[u8; 32]) -> io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        w.write_all(&seed.to_le_bytes())?;
        w.write_all(config_hash)?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        let mut rec = Vec::with_capacity(32 + 8 * self.dim);
        let emit = |rec: &mut Vec<u8>, w: &mut W| -> io::Result<()> {
            w.write_all(&(rec.len() as u32).to_le_bytes())?;
            w.write_all(rec)?;
            rec.clear();
            Ok(())
        };
        for k in 0..self.len() {
            rec.push(0);
            rec.extend_from_slice(&self.times[k].to_le_bytes());
            rec.extend_from_slice(&(self.regimes[k] as u64).to_le_bytes());
            rec.push(self.kinds[k] as u8);
            for v in self.x(k) {
                rec.extend_from_slice(&v.to_le_bytes());
            }
            emit(&mut rec, &mut w)?;
        }
        for j in &self.jumps {
            rec.push(1);
            rec.extend_from_slice(&j.time.to_le_bytes());
            rec.extend_from_slice(&(j.from as u64).to_le_bytes());
            rec.extend_from_slice(&(j.to as u64).to_le_bytes());
            rec.extend_from_slice(&j.mark.to_le_bytes());
            emit(&mut rec, &mut w)?;
        }
        for (id, value) in [(0u8, self.eta), (1u8, self.tau)] {
            if let Some(t) = value {
                rec.push(2);
                rec.push(id);
                rec.extend_from_slice(&t.to_le_bytes());
                emit(&mut rec, &mut w)?;
            }
        }
        Ok(())
    }
}

pub const BINARY_MAGIC: &[u8; 8] = b"RSDTRAJ1";
pub const BINARY_VERSION: u32 = 1;

/// Decoded binary log.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLog {
    pub seed: u64,
    pub config_hash: [u8; 32],
    pub dim: usize,
    pub samples: Vec<(f64, Regime, SampleKind, Vec<f64>)>,
    pub jumps: Vec<JumpRecord>,
    pub eta: Option<f64>,
    pub tau: Option<f64>,
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

fn take<const N: usize>(buf: &[u8], at: &mut usize) -> io::Result<[u8; N]> {
    let s = buf.get(*at..*at + N).ok_or_else(|| invalid("truncated record"))?;
    *at += N;
    Ok(s.try_into().expect("slice length"))
}

/// Read a log written by [`Trajectory::write_binary`].
pub fn read_binary<R: Read>(mut r: R) -> io::Result<BinaryLog> {
    let mut head = [0u8; 8 + 4 + 8 + 32 + 4];
    r.read_exact(&mut head)?;
    if &head[..8] != BINARY_MAGIC {
        return Err(invalid("bad magic"));
    }
    let mut at = 8;
    let version = u32::from_le_bytes(take(&head, &mut at)?);
    if version != BINARY_VERSION {
        return Err(invalid("unsupported version"));
    }
    let seed = u64::from_le_bytes(take(&head, &mut at)?);
    let config_hash = take::<32>(&head, &mut at)?;
    let dim = u32::from_le_bytes(take(&head, &mut at)?) as usize;
    let mut log = BinaryLog { seed, config_hash, dim, samples: vec![], jumps: vec![], eta: None, tau: None };
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let mut at = 0;
    while at < body.len() {
        let len = u32::from_le_bytes(take(&body, &mut at)?) as usize;
        let rec = body.get(at..at + len).ok_or_else(|| invalid("truncated record"))?;
        at += len;
        let mut p = 1;
        match rec.first() {
            Some(0) => {
                let t = f64::from_le_bytes(take(rec, &mut p)?);
                let i = u64::from_le_bytes(take(rec, &mut p)?) as Regime;
                let kind = SampleKind::from_u8(take::<1>(rec, &mut p)?[0]).ok_or_else(|| invalid("bad sample kind"))?;
                let x = (0..dim)
                    .map(|_| take(rec, &mut p).map(f64::from_le_bytes))
                    .collect::<io::Result<Vec<_>>>()?;
                log.samples.push((t, i, kind, x));
            }
            Some(1) => {
                let time = f64::from_le_bytes(take(rec, &mut p)?);
                let from = u64::from_le_bytes(take(rec, &mut p)?) as Regime;
                let to = u64::from_le_bytes(take(rec, &mut p)?) as Regime;
                let mark = f64::from_le_bytes(take(rec, &mut p)?);
                log.jumps.push(JumpRecord { time, from, to, mark });
            }
            Some(2) => {
                let id = take::<1>(rec, &mut p)?[0];
                let t = f64::from_le_bytes(take(rec, &mut p)?);
                match id {
                    0 => log.eta = Some(t),
                    1 => log.tau = Some(t),
                    _ => return Err(invalid("bad marker id")),
                }
            }
            _ => return Err(invalid("bad record tag")),
        }
    }
    Ok(log)
}
