//! Subchannel assignment for the D2D transmitters.
//!
//! Uncoordinated: every transmitter picks one of `N` subchannels uniformly
//! and independently. Coordinated: each cell shuffles its transmitters,
//! cuts them into consecutive blocks of `N` (the last block holds the
//! remainder) and gives the members of a block distinct subchannels drawn
//! uniformly without replacement. Cells are handled independently.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::ppp::NetworkRealization;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleMode {
    Uncoordinated,
    Coordinated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScheduleConfig {
    pub n_subchannels: u32,
    pub mode: ScheduleMode,
}

impl ScheduleConfig {
    pub fn new(n_subchannels: u32, mode: ScheduleMode) -> Result<Self> {
        if n_subchannels == 0 {
            return Err(Error::param("n_subchannels", "must be >= 1"));
        }
        Ok(Self { n_subchannels, mode })
    }

    pub fn uncoordinated(n: u32) -> Result<Self> {
        Self::new(n, ScheduleMode::Uncoordinated)
    }

    pub fn coordinated(n: u32) -> Result<Self> {
        Self::new(n, ScheduleMode::Coordinated)
    }
}

/// Transmitter handle: the typical TX or an index into `d2d_txs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TxId {
    Typical,
    Other(usize),
}

/// One coordination group inside a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSpan {
    pub cell: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubchannelAssignment {
    /// Subchannel in `1..=N` for each entry of `d2d_txs`.
    pub sc_of_tx: Vec<u32>,
    pub typical_sc: u32,
    pub n_subchannels: u32,
    /// Flattened group members; empty in uncoordinated mode.
    pub group_members: Vec<TxId>,
    pub groups: Vec<GroupSpan>,
}

impl SubchannelAssignment {
    pub fn subchannel(&self, tx: TxId) -> u32 {
        match tx {
            TxId::Typical => self.typical_sc,
            TxId::Other(i) => self.sc_of_tx[i],
        }
    }

    pub fn group(&self, span: &GroupSpan) -> &[TxId] {
        &self.group_members[span.start..span.end]
    }

    pub fn is_coordinated(&self) -> bool {
        !self.groups.is_empty()
    }
}

/// Dispatches on `config.mode`.
pub fn schedule<T: Real, R: Rng + ?Sized>(
    realization: &NetworkRealization<T>,
    config: &ScheduleConfig,
    rng: &mut R,
) -> Result<SubchannelAssignment> {
    match config.mode {
        ScheduleMode::Uncoordinated => schedule_uncoordinated(realization, config, rng),
        ScheduleMode::Coordinated => schedule_coordinated(realization, config, rng),
    }
}

pub fn schedule_uncoordinated<T: Real, R: Rng + ?Sized>(
    realization: &NetworkRealization<T>,
    config: &ScheduleConfig,
    rng: &mut R,
) -> Result<SubchannelAssignment> {
    let n = checked_n(config)?;
    let typical_sc = rng.random_range(1..=n);
    let sc_of_tx = (0..realization.d2d_txs.len())
        .map(|_| rng.random_range(1..=n))
        .collect();
    Ok(SubchannelAssignment {
        sc_of_tx,
        typical_sc,
        n_subchannels: n,
        group_members: Vec::new(),
        groups: Vec::new(),
    })
}

/// With `N = 1` this is exactly [`schedule_uncoordinated`].
pub fn schedule_coordinated<T: Real, R: Rng + ?Sized>(
    realization: &NetworkRealization<T>,
    config: &ScheduleConfig,
    rng: &mut R,
) -> Result<SubchannelAssignment> {
    let n = checked_n(config)?;
    if n == 1 {
        return schedule_uncoordinated(realization, config, rng);
    }
    let cells = realization.aps.len();
    let total = realization.d2d_txs.len() + 1;

    // Counting sort of transmitters by cell.
    let mut offsets = vec![0usize; cells + 1];
    offsets[realization.cell_of_typical_tx + 1] += 1;
    for &c in &realization.cell_of_tx {
        offsets[c + 1] += 1;
    }
    for c in 0..cells {
        offsets[c + 1] += offsets[c];
    }
    let mut members = vec![TxId::Typical; total];
    let mut fill = offsets.clone();
    members[fill[realization.cell_of_typical_tx]] = TxId::Typical;
    fill[realization.cell_of_typical_tx] += 1;
    for (i, &c) in realization.cell_of_tx.iter().enumerate() {
        members[fill[c]] = TxId::Other(i);
        fill[c] += 1;
    }

    let block = n as usize;
    let mut sc_of_tx = vec![0u32; realization.d2d_txs.len()];
    let mut typical_sc = 0u32;
    let mut groups = Vec::with_capacity(total / block + cells);
    let mut pool: Vec<u32> = (1..=n).collect();
    for cell in 0..cells {
        let (lo, hi) = (offsets[cell], offsets[cell + 1]);
        members[lo..hi].shuffle(rng);
        let mut start = lo;
        while start < hi {
            let end = (start + block).min(hi);
            let (chosen, _) = pool.partial_shuffle(rng, end - start);
            for (&tx, &sc) in members[start..end].iter().zip(chosen.iter()) {
                match tx {
                    TxId::Typical => typical_sc = sc,
                    TxId::Other(i) => sc_of_tx[i] = sc,
                }
            }
            groups.push(GroupSpan { cell, start, end });
            start = end;
        }
    }
    Ok(SubchannelAssignment {
        sc_of_tx,
        typical_sc,
        n_subchannels: n,
        group_members: members,
        groups,
    })
}

fn checked_n(config: &ScheduleConfig) -> Result<u32> {
    if config.n_subchannels == 0 {
        return Err(Error::param("n_subchannels", "must be >= 1"));
    }
    Ok(config.n_subchannels)
}

/// Non-typical transmitters sharing the typical transmitter's subchannel,
/// split by whether they sit in the typical receiver's cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CochannelInterferers<T> {
    pub intracell: Vec<Point2<T>>,
    pub intercell: Vec<Point2<T>>,
}

impl<T> Default for CochannelInterferers<T> {
    fn default() -> Self {
        Self {
            intracell: Vec::new(),
            intercell: Vec::new(),
        }
    }
}

impl<T: Real> CochannelInterferers<T> {
    pub fn len(&self) -> usize {
        self.intracell.len() + self.intercell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point2<T>> {
        self.intracell.iter().chain(self.intercell.iter())
    }
}

pub fn cochannel_interferers<T: Real>(
    realization: &NetworkRealization<T>,
    assignment: &SubchannelAssignment,
) -> CochannelInterferers<T> {
    let mut out = CochannelInterferers {
        intracell: Vec::new(),
        intercell: Vec::new(),
    };
    let home = realization.cell_of_typical_rx;
    for ((&p, &cell), &sc) in realization
        .d2d_txs
        .iter()
        .zip(&realization.cell_of_tx)
        .zip(&assignment.sc_of_tx)
    {
        if sc != assignment.typical_sc {
            continue;
        }
        if cell == home {
            out.intracell.push(p);
        } else {
            out.intercell.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppp::{sample_network, PppConfig};
    use crate::rng::{Purpose, StreamKey};
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// Realization with `k` transmitters in AP 0's cell (typical included)
    /// and a far AP 1 holding `far` transmitters.
    fn toy(k: usize, far: usize) -> NetworkRealization<f64> {
        let w = crate::geometry::SimWindow::new(Point2::origin(), 50.0).unwrap();
        let aps = vec![Point2::new(0.0, 0.0), Point2::new(20.0, 0.0)];
        let mut d2d_txs = Vec::new();
        let mut cell_of_tx = Vec::new();
        for i in 0..k - 1 {
            d2d_txs.push(Point2::new(0.1 * i as f64, 0.5));
            cell_of_tx.push(0);
        }
        for i in 0..far {
            d2d_txs.push(Point2::new(20.0, 0.1 * i as f64));
            cell_of_tx.push(1);
        }
        NetworkRealization {
            aps,
            d2d_txs,
            typical_tx: Point2::new(0.3, 0.0),
            typical_rx: Point2::origin(),
            cell_of_tx,
            cell_of_typical_tx: 0,
            cell_of_typical_rx: 0,
            r_a: 0.0,
            window: w,
            attempts: 0,
        }
    }

    fn rng(trial: u64) -> crate::rng::TrialRng {
        StreamKey::new(5, trial, Purpose::Schedule).rng()
    }

    fn cell_loads(net: &NetworkRealization<f64>, a: &SubchannelAssignment, cell: usize) -> Vec<usize> {
        let mut loads = vec![0usize; a.n_subchannels as usize];
        if net.cell_of_typical_tx == cell {
            loads[a.typical_sc as usize - 1] += 1;
        }
        for (i, &c) in net.cell_of_tx.iter().enumerate() {
            if c == cell {
                loads[a.sc_of_tx[i] as usize - 1] += 1;
            }
        }
        loads
    }

    #[test]
    fn zero_subchannels_rejected() {
        assert!(ScheduleConfig::coordinated(0).is_err());
    }

    #[test]
    fn single_subchannel_puts_everyone_on_one() {
        let net = toy(7, 5);
        for cfg in [ScheduleConfig::uncoordinated(1).unwrap(), ScheduleConfig::coordinated(1).unwrap()] {
            let a = schedule(&net, &cfg, &mut rng(0)).unwrap();
            assert_eq!(a.typical_sc, 1);
            assert!(a.sc_of_tx.iter().all(|&s| s == 1));
            assert_eq!(cochannel_interferers(&net, &a).len(), net.d2d_txs.len());
        }
    }

    #[test]
    fn coordinated_n1_is_uncoordinated() {
        let net = toy(9, 4);
        let u = schedule_uncoordinated(&net, &ScheduleConfig::uncoordinated(1).unwrap(), &mut rng(3)).unwrap();
        let c = schedule_coordinated(&net, &ScheduleConfig::coordinated(1).unwrap(), &mut rng(3)).unwrap();
        assert_eq!(u, c);
    }

    #[test]
    fn seven_over_three_groups() {
        let net = toy(7, 0);
        let cfg = ScheduleConfig::coordinated(3).unwrap();
        for t in 0..100 {
            let a = schedule_coordinated(&net, &cfg, &mut rng(t)).unwrap();
            let mut sizes: Vec<usize> = a.groups.iter().filter(|g| g.cell == 0).map(|g| g.end - g.start).collect();
            sizes.sort();
            assert_eq!(sizes, vec![1, 3, 3]);
            let loads = cell_loads(&net, &a, 0);
            assert!(loads.iter().all(|&l| l == 2 || l == 3), "{loads:?}");
        }
    }

    #[test]
    fn small_cell_is_orthogonal() {
        let net = toy(4, 30);
        let cfg = ScheduleConfig::coordinated(5).unwrap();
        for t in 0..100 {
            let a = schedule_coordinated(&net, &cfg, &mut rng(t)).unwrap();
            assert!(cochannel_interferers(&net, &a).intracell.is_empty());
        }
    }

    #[test]
    fn subchannel_one_load_averages_k_over_n() {
        let net = toy(7, 0);
        let cfg = ScheduleConfig::coordinated(3).unwrap();
        let draws = 30_000;
        let total: usize = (0..draws)
            .map(|t| cell_loads(&net, &schedule_coordinated(&net, &cfg, &mut rng(t)).unwrap(), 0)[0])
            .sum();
        let mean = total as f64 / draws as f64;
        // Load is 2 or 3 with mean 7/3; sd <= 0.5.
        assert!((mean - 7.0 / 3.0).abs() < 4.0 * 0.5 / (draws as f64).sqrt(), "{mean}");
    }

    #[test]
    fn uncoordinated_frequencies_are_uniform() {
        let net = toy(1, 99_999);
        let cfg = ScheduleConfig::uncoordinated(10).unwrap();
        let a = schedule_uncoordinated(&net, &cfg, &mut rng(1)).unwrap();
        let mut counts = [0usize; 10];
        for &s in &a.sc_of_tx {
            counts[s as usize - 1] += 1;
        }
        for c in counts {
            assert!((c as f64 / 99_999.0 - 0.1).abs() < 0.003, "{counts:?}");
        }
    }

    #[test]
    fn uncoordinated_choices_are_uncorrelated() {
        // Indicator correlation of "TX0 on SC1" and "TX1 on SC1" across draws.
        let net = toy(1, 2);
        let cfg = ScheduleConfig::uncoordinated(4).unwrap();
        let draws = 40_000;
        let (mut a, mut b, mut ab) = (0.0, 0.0, 0.0);
        for t in 0..draws {
            let s = schedule_uncoordinated(&net, &cfg, &mut rng(t)).unwrap();
            let x = (s.sc_of_tx[0] == 1) as u8 as f64;
            let y = (s.sc_of_tx[1] == 1) as u8 as f64;
            a += x;
            b += y;
            ab += x * y;
        }
        let n = draws as f64;
        let cov = ab / n - (a / n) * (b / n);
        let corr = cov / (0.25 * 0.75);
        assert!(corr.abs() < 4.0 / n.sqrt(), "{corr}");
    }

    #[test]
    fn uncoordinated_interferer_count_matches_thinning() {
        let cfg = ScheduleConfig::uncoordinated(10).unwrap();
        let trials = 2000;
        let mut total = 0usize;
        let mut area = 0.0;
        for t in 0..trials {
            let p = PppConfig::new(1.0, 10.0, 0.3, 21).unwrap().with_trial(t);
            let net = sample_network(&p).unwrap();
            let a = schedule(&net, &cfg, &mut p.stream(Purpose::Schedule).rng()).unwrap();
            total += cochannel_interferers(&net, &a).len();
            area = p.window.area();
        }
        let mean = total as f64 / trials as f64;
        let expected = 1.0 * area;
        // Poisson(30) per trial.
        assert!((mean - expected).abs() < 4.0 * (expected / trials as f64).sqrt(), "{mean} vs {expected}");
    }

    proptest! {
        #[test]
        fn coordinated_invariants(seed in 0u64..5000, n in 2u32..12, lambda_d in 1.0f64..25.0) {
            let p = PppConfig::new(1.0, lambda_d, 0.2, seed).unwrap();
            let net = sample_network(&p).unwrap();
            let cfg = ScheduleConfig::coordinated(n).unwrap();
            let a = schedule(&net, &cfg, &mut p.stream(Purpose::Schedule).rng()).unwrap();

            // Every transmitter appears in exactly one group.
            let mut seen = HashSet::new();
            for g in &a.groups {
                let members = a.group(g);
                prop_assert!(members.len() <= n as usize && !members.is_empty());
                let scs: HashSet<u32> = members.iter().map(|&t| a.subchannel(t)).collect();
                prop_assert_eq!(scs.len(), members.len());
                for &t in members {
                    prop_assert!(seen.insert(t));
                }
            }
            prop_assert_eq!(seen.len(), net.d2d_txs.len() + 1);

            for cell in 0..net.aps.len() {
                let k = net.count_in_cell(cell) + (net.cell_of_typical_tx == cell) as usize;
                let floor = k / n as usize;
                for l in cell_loads(&net, &a, cell) {
                    prop_assert!(l == floor || l == floor + 1);
                }
            }
            let co = cochannel_interferers(&net, &a);
            let shared = a.sc_of_tx.iter().filter(|&&s| s == a.typical_sc).count();
            prop_assert_eq!(co.len(), shared);
            prop_assert!(a.sc_of_tx.iter().all(|&s| (1..=n).contains(&s)));
        }
    }
}
