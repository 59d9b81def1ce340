//! One-step tabular Q-learning with a linearly decaying epsilon-greedy
//! exploration schedule.

use super::action::ActionSpec;
use super::encoding::{BinScheme, EncodedState};
use super::env::Environment;
use super::AgentError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const MAGIC: &[u8; 4] = b"LLQP";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of episodes over which epsilon decays linearly.
    pub decay_fraction: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            decay_fraction: 0.6,
        }
    }
}

impl Hyperparams {
    pub fn epsilon(&self, episode: usize, episodes: usize) -> f64 {
        let horizon = (self.decay_fraction * episodes as f64).max(1.0);
        let f = (episode as f64 / horizon).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySnapshot {
    pub num_states: usize,
    pub num_actions: usize,
    /// Row-major `num_states x num_actions`.
    pub q_values: Vec<f64>,
    pub hyperparams: Hyperparams,
    pub episodes: u64,
    pub seed: u64,
    pub bins: BinScheme,
    pub actions: ActionSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exploration {
    Greedy,
    EpsilonGreedy(f64),
}

impl PolicySnapshot {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            q_values: vec![0.0; num_states * num_actions],
            hyperparams: Hyperparams::default(),
            episodes: 0,
            seed: 0,
            bins: BinScheme::default(),
            actions: ActionSpec::default(),
        }
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.q_values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn q(&self, s: usize, a: usize) -> f64 {
        self.q_values[s * self.num_actions + a]
    }

    /// Argmax of a row, lowest index on ties.
    pub fn greedy(&self, s: usize) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn max_q(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_valid(&self) -> bool {
        self.q_values.len() == self.num_states * self.num_actions && self.q_values.iter().all(|v| v.is_finite())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.num_states as u32).to_le_bytes())?;
        w.write_all(&(self.num_actions as u32).to_le_bytes())?;
        let h = &self.hyperparams;
        for v in [h.alpha, h.gamma, h.epsilon_start, h.epsilon_end, h.decay_fraction] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.episodes.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.actions.speed_scale.to_le_bytes())?;
        w.write_all(&self.actions.land_descent.to_le_bytes())?;
        w.write_all(&self.actions.max_hold.to_le_bytes())?;
        for edges in [&self.bins.altitude, &self.bins.depth, &self.bins.lateral, &self.bins.confidence] {
            w.write_all(&(edges.len() as u32).to_le_bytes())?;
            for e in edges.iter() {
                w.write_all(&e.to_le_bytes())?;
            }
        }
        for v in &self.q_values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, AgentError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(AgentError::BadFormat("bad magic".into()));
        }
        let mut v = [0u8; 2];
        r.read_exact(&mut v)?;
        let version = u16::from_le_bytes(v);
        if version != FORMAT_VERSION {
            return Err(AgentError::BadFormat(format!("unsupported version {version}")));
        }
        let num_states = read_u32(r)? as usize;
        let num_actions = read_u32(r)? as usize;
        if num_states == 0 || num_actions == 0 || num_states.saturating_mul(num_actions) > 1 << 26 {
            return Err(AgentError::BadFormat("bad table dimensions".into()));
        }
        let hyperparams = Hyperparams {
            alpha: read_f64(r)?,
            gamma: read_f64(r)?,
            epsilon_start: read_f64(r)?,
            epsilon_end: read_f64(r)?,
            decay_fraction: read_f64(r)?,
        };
        let episodes = read_u64(r)?;
        let seed = read_u64(r)?;
        let actions = ActionSpec {
            speed_scale: read_f64(r)?,
            land_descent: read_f64(r)?,
            max_hold: read_u32(r)?,
        };
        let mut edges: [Vec<f64>; 4] = Default::default();
        for e in edges.iter_mut() {
            let n = read_u32(r)? as usize;
            if n > 1024 {
                return Err(AgentError::BadFormat("bad bin edge count".into()));
            }
            *e = (0..n).map(|_| read_f64(r)).collect::<Result<_, _>>()?;
        }
        let [altitude, depth, lateral, confidence] = edges;
        let bins = BinScheme {
            altitude,
            depth,
            lateral,
            confidence,
        };
        let q_values = (0..num_states * num_actions)
            .map(|_| read_f64(r))
            .collect::<Result<Vec<_>, _>>()?;
        let p = Self {
            num_states,
            num_actions,
            q_values,
            hyperparams,
            episodes,
            seed,
            bins,
            actions,
        };
        if !p.is_valid() {
            return Err(AgentError::BadFormat("non-finite q value".into()));
        }
        Ok(p)
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self, AgentError> {
        Self::read_from(&mut bytes)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), AgentError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, AgentError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Chooses an action: argmax with lowest-index tie-break, or uniformly at
/// random with probability epsilon.
pub fn act<R: Rng + ?Sized>(policy: &PolicySnapshot, s: EncodedState, mode: Exploration, rng: &mut R) -> usize {
    match mode {
        Exploration::Greedy => policy.greedy(s.0),
        Exploration::EpsilonGreedy(eps) => {
            if rng.random::<f64>() < eps {
                rng.random_range(0..policy.num_actions)
            } else {
                policy.greedy(s.0)
            }
        }
    }
}

/// Trains from a zero-initialized table. Deterministic given `seed`.
pub fn train<E: Environment>(
    env: &mut E,
    hp: &Hyperparams,
    episodes: usize,
    seed: u64,
) -> Result<(PolicySnapshot, Vec<CurvePoint>), AgentError> {
    let init = PolicySnapshot::zeros(env.num_states(), env.num_actions());
    train_from(env, init, hp, episodes, seed)
}

/// Continues training an existing table.
pub fn train_from<E: Environment>(
    env: &mut E,
    mut policy: PolicySnapshot,
    hp: &Hyperparams,
    episodes: usize,
    seed: u64,
) -> Result<(PolicySnapshot, Vec<CurvePoint>), AgentError> {
    if episodes == 0 {
        return Err(AgentError::InvalidConfig("episodes must be >= 1".into()));
    }
    if policy.num_states != env.num_states() || policy.num_actions != env.num_actions() {
        return Err(AgentError::InvalidConfig("table does not match environment".into()));
    }
    if !(hp.alpha > 0.0 && hp.alpha <= 1.0 && (0.0..1.0).contains(&hp.gamma)) {
        return Err(AgentError::InvalidConfig("alpha must be in (0,1] and gamma in [0,1)".into()));
    }
    let mut explore_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe4_u64.rotate_left(56) ^ 0x0123_4567_89ab_cdef);
    let na = policy.num_actions;
    let mut curve = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        let eps = hp.epsilon(ep, episodes);
        let mode = Exploration::EpsilonGreedy(eps);
        let mut s = env.reset(&mut env_rng);
        let mut ret = 0.0;
        loop {
            let a = act(&policy, EncodedState(s), mode, &mut explore_rng);
            let t = env.step(a);
            ret += t.reward;
            let target = if t.done {
                t.reward
            } else {
                t.reward + hp.gamma * policy.max_q(t.state)
            };
            let q = &mut policy.q_values[s * na + a];
            *q += hp.alpha * (target - *q);
            s = t.state;
            if t.done || t.truncated {
                break;
            }
        }
        curve.push(CurvePoint {
            episode: ep,
            episode_return: ret,
            epsilon: eps,
        });
    }
    policy.hyperparams = *hp;
    policy.episodes += episodes as u64;
    policy.seed = seed;
    Ok((policy, curve))
}

/// Writes a learning curve as CSV with header `episode,return,epsilon`.
pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], w: W) -> Result<(), AgentError> {
    let mut out = csv::Writer::from_writer(w);
    for p in curve {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(r: R) -> Result<Vec<CurvePoint>, AgentError> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(AgentError::from)).collect()
}

/// Centered moving average with the window clipped at the ends.
pub fn smooth(curve: &[CurvePoint], window: usize) -> Vec<f64> {
    let n = curve.len();
    let w = window.max(1);
    let mut prefix = vec![0.0; n + 1];
    for (i, p) in curve.iter().enumerate() {
        prefix[i + 1] = prefix[i] + p.episode_return;
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2);
            let hi = (i + w - w / 2).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::env::ChainMdp;
    use super::*;

    #[test]
    fn epsilon_schedule() {
        let hp = Hyperparams::default();
        assert_eq!(hp.epsilon(0, 100), 1.0);
        assert!((hp.epsilon(30, 100) - 0.525).abs() < 1e-12);
        assert!((hp.epsilon(60, 100) - 0.05).abs() < 1e-12);
        assert!((hp.epsilon(99, 100) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn greedy_tie_break_and_dominant_entry() {
        let mut p = PolicySnapshot::zeros(2, 28);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(act(&p, EncodedState(0), Exploration::Greedy, &mut rng), 0);
        p.q_values[28 + 17] = 3.0;
        assert_eq!(act(&p, EncodedState(1), Exploration::Greedy, &mut rng), 17);
    }

    #[test]
    fn zero_episodes_rejected() {
        let mut env = ChainMdp::new();
        assert!(train(&mut env, &Hyperparams::default(), 0, 0).is_err());
    }

    #[test]
    fn flat_file_roundtrip() {
        let mut env = ChainMdp::new();
        let hp = Hyperparams {
            gamma: 0.9,
            ..Hyperparams::default()
        };
        let (p, _) = train(&mut env, &hp, 200, 3).unwrap();
        let bytes = p.to_bytes();
        assert_eq!(&bytes[..4], b"LLQP");
        assert_eq!(PolicySnapshot::from_bytes(&bytes).unwrap(), p);
        assert!(PolicySnapshot::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(PolicySnapshot::from_bytes(&bad).is_err());
    }

    #[test]
    fn curve_csv_roundtrip() {
        let curve = vec![
            CurvePoint {
                episode: 0,
                episode_return: -1.5,
                epsilon: 1.0,
            },
            CurvePoint {
                episode: 1,
                episode_return: 2.25,
                epsilon: 0.5,
            },
        ];
        let mut buf = Vec::new();
        write_curve_csv(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next(), Some("episode,return,epsilon"));
        assert_eq!(read_curve_csv(&buf[..]).unwrap(), curve);
    }

    #[test]
    fn smoothing_window() {
        let curve: Vec<_> = (0..5)
            .map(|i| CurvePoint {
                episode: i,
                episode_return: i as f64,
                epsilon: 0.0,
            })
            .collect();
        let s = smooth(&curve, 3);
        assert_eq!(s, vec![0.5, 1.0, 2.0, 3.0, 3.5]);
    }
}
