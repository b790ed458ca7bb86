//! Monte Carlo wave-function engine: deterministic non-Hermitian evolution
//! punctuated by stochastic quantum jumps.
//!
//! Between jumps the state follows dψ/dt = −i H_eff(t) ψ integrated with
//! fixed-step RK4 and renormalized after every step. At each step a single
//! uniform draw ε decides against the first-order jump probability
//! δp = Σ_m dt·⟨ψ|L†_m L_m|ψ⟩ whether a jump replaces the coherent step.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::hilbert::{BasisIndex, DenseMatrix, SparseOp, StateVector, DIM};
use crate::model::{
    coupling_generator, decay_diagonal, detuning_diagonal, excitation_diagonal, jump_operators,
    JumpChannel, JumpOperator, LongMode, ModelError, SystemParams,
};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Total jump probability per step above which the step is rejected.
pub const MAX_STEP_JUMP_PROBABILITY: f64 = 0.1;

/// Excitation expectation below which a trajectory counts as fully emitted.
const EXCITATION_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum StepError {
    #[error(
        "jump probability δp = {dp:.3e} ≥ {MAX_STEP_JUMP_PROBABILITY} at t = {t:.4}: \
         dt = {dt:.2e} is too large for the current decay rates"
    )]
    StepTooLarge { dp: f64, t: f64, dt: f64 },
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// One recorded quantum jump.
#[derive(Clone, Debug)]
pub struct JumpEvent {
    /// Clock time at the end of the step in which the jump fired [1/g].
    pub time: f64,
    pub channel: JumpChannel,
    /// Atomic-level populations of the normalized post-jump state,
    /// in basis order (G2, 1′₋₁, 1′₁, 0″₀).
    pub atom_populations: [f64; 4],
    /// Probability that a mode-2 photon exists in the post-jump state or was
    /// already emitted by this time (1.0 once a mode-2 cavity jump occurred).
    pub mode2_excitation: f64,
}

/// Full record of a single quantum trajectory.
#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    /// Jumps in time order; at most two on a cleanly terminated record.
    pub jumps: Vec<JumpEvent>,
    /// True when all excitation was emitted before t_max.
    pub terminated_cleanly: bool,
    pub final_state: StateVector,
    /// RNG seed this trajectory ran with.
    pub seed: u64,
}

impl TrajectoryResult {
    pub fn cavity_jumps(&self) -> impl Iterator<Item = &JumpEvent> {
        self.jumps.iter().filter(|j| j.channel.is_cavity())
    }
}

/// Deterministic child seed for trajectory `index` of an ensemble.
///
/// Injective in `index` for a fixed master seed: a golden-ratio stride mixed
/// through the SplitMix64 finalizer.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let z = master
        ^ index
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0x243F_6A88_85A3_08D3);
    splitmix(z)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Scratch buffers reused across the steps of one trajectory.
struct Workspace {
    k1: [C64; DIM],
    k2: [C64; DIM],
    k3: [C64; DIM],
    k4: [C64; DIM],
    tmp: [C64; DIM],
    dp: Vec<f64>,
}

impl Workspace {
    fn new(n_channels: usize) -> Workspace {
        Workspace {
            k1: [ZERO; DIM],
            k2: [ZERO; DIM],
            k3: [ZERO; DIM],
            k4: [ZERO; DIM],
            tmp: [ZERO; DIM],
            dp: vec![0.0; n_channels],
        }
    }
}

/// Precomputed immutable machinery for stepping trajectories of one parameter
/// set; freely shareable between parallel workers.
pub struct McwfEngine {
    params: SystemParams,
    /// −i × coupling generator of mode 1 (entries of a sparse matrix).
    m1: SparseOp,
    /// −i × coupling generator of mode 2.
    m2: SparseOp,
    /// Diagonal of −i H_eff at zero coupling: −i E_k − r_k/2.
    dvec: [C64; DIM],
    jump_ops: Vec<JumpOperator>,
    excitation: [f64; DIM],
    /// 1.0 on basis states holding at least one mode-2 photon.
    mode2_weight: [f64; DIM],
}

impl McwfEngine {
    /// Engine with the native (circular-basis) jump operators.
    pub fn new(params: &SystemParams) -> Result<McwfEngine, ModelError> {
        Self::with_jump_operators(params, jump_operators(params))
    }

    /// Engine with a caller-supplied jump set. The set must unravel the same
    /// dissipator: Σ_m L†_m L_m has to match the native decay diagonal.
    pub fn with_jump_operators(
        params: &SystemParams,
        jump_ops: Vec<JumpOperator>,
    ) -> Result<McwfEngine, ModelError> {
        params.validate()?;
        let decay = decay_diagonal(params);
        let mut total = SparseOp::zero();
        for j in &jump_ops {
            total = total.add(&j.op.dagger().matmul(&j.op));
        }
        let mut diag_expected = [ZERO; DIM];
        for (d, &r) in diag_expected.iter_mut().zip(decay.iter()) {
            *d = C64::new(r, 0.0);
        }
        let resid = total.add(&SparseOp::from_diagonal(&diag_expected).scaled(C64::new(-1.0, 0.0)));
        if resid.max_abs() > 1e-10 {
            return Err(ModelError::InvalidParams(
                "jump set does not unravel the native dissipator".into(),
            ));
        }

        let minus_i = C64::new(0.0, -1.0);
        let detuning = detuning_diagonal(params);
        let mut dvec = [ZERO; DIM];
        for k in 0..DIM {
            dvec[k] = C64::new(-0.5 * decay[k], -detuning[k]);
        }
        let mut mode2_weight = [0.0; DIM];
        for (k, w) in mode2_weight.iter_mut().enumerate() {
            let b = BasisIndex::from_flat(k);
            if b.occ[2] + b.occ[3] > 0 {
                *w = 1.0;
            }
        }
        Ok(McwfEngine {
            params: *params,
            m1: coupling_generator(LongMode::One).scaled(minus_i),
            m2: coupling_generator(LongMode::Two).scaled(minus_i),
            dvec,
            jump_ops,
            excitation: excitation_diagonal(),
            mode2_weight,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn jump_ops(&self) -> &[JumpOperator] {
        &self.jump_ops
    }

    /// ⟨ψ|N|ψ⟩ for the excitation number operator.
    pub fn excitation_expectation(&self, psi: &StateVector) -> f64 {
        psi.0
            .iter()
            .zip(self.excitation.iter())
            .map(|(c, &w)| w * c.norm_sqr())
            .sum()
    }

    /// dψ/dt = −i H_eff ψ at couplings (g1, g2).
    fn deriv(&self, g1: f64, g2: f64, x: &[C64; DIM], out: &mut [C64; DIM]) {
        for k in 0..DIM {
            out[k] = self.dvec[k] * x[k];
        }
        if g1 != 0.0 {
            for e in self.m1.entries() {
                out[e.row as usize] += e.val * g1 * x[e.col as usize];
            }
        }
        if g2 != 0.0 {
            for e in self.m2.entries() {
                out[e.row as usize] += e.val * g2 * x[e.col as usize];
            }
        }
    }

    /// Advance one step of size `dt` from time `t` under the single uniform
    /// draw `eps`; returns the jump event if one fired.
    ///
    /// `psi` must be normalized on entry and is left normalized.
    pub fn step(
        &self,
        psi: &mut StateVector,
        t: f64,
        dt: f64,
        eps: f64,
    ) -> Result<Option<JumpEvent>, StepError> {
        let g0 = self.params.couplings_at(t);
        let gh = self.params.couplings_at(t + 0.5 * dt);
        let g1 = self.params.couplings_at(t + dt);
        let mut ws = Workspace::new(self.jump_ops.len());
        self.step_inner(psi, t, dt, [g0, gh, g1], eps, &mut ws, false)
    }

    fn step_inner(
        &self,
        psi: &mut StateVector,
        t: f64,
        dt: f64,
        g: [(f64, f64); 3],
        eps: f64,
        ws: &mut Workspace,
        mode2_emitted: bool,
    ) -> Result<Option<JumpEvent>, StepError> {
        // First-order jump probabilities from the pre-step state.
        let mut dp_total = 0.0;
        for (m, j) in self.jump_ops.iter().enumerate() {
            let dp = if j.op.nnz() == 0 {
                0.0
            } else {
                dt * j.op.apply_norm_sq(psi)
            };
            ws.dp[m] = dp;
            dp_total += dp;
        }
        if dp_total >= MAX_STEP_JUMP_PROBABILITY {
            return Err(StepError::StepTooLarge { dp: dp_total, t, dt });
        }

        if eps < dp_total {
            // A jump replaces the coherent step.
            let mut acc = 0.0;
            let mut chosen = self.jump_ops.len() - 1;
            for (m, &dp) in ws.dp.iter().enumerate() {
                acc += dp;
                if eps < acc {
                    chosen = m;
                    break;
                }
            }
            let op = &self.jump_ops[chosen];
            op.op.apply_into(psi, &mut StateVector::wrap(&mut ws.tmp));
            psi.0.copy_from_slice(&ws.tmp);
            psi.normalize();
            let is_mode2_cavity = matches!(
                op.channel,
                JumpChannel::Cavity { mode: LongMode::Two, .. }
            );
            let mode2_excitation = if mode2_emitted || is_mode2_cavity {
                1.0
            } else {
                psi.0
                    .iter()
                    .zip(self.mode2_weight.iter())
                    .map(|(c, &w)| w * c.norm_sqr())
                    .sum()
            };
            return Ok(Some(JumpEvent {
                time: t + dt,
                channel: op.channel,
                atom_populations: psi.atom_populations(),
                mode2_excitation,
            }));
        }

        // RK4 on the non-Hermitian system, then renormalize.
        let x = &psi.0;
        self.deriv(g[0].0, g[0].1, x, &mut ws.k1);
        let half = 0.5 * dt;
        for k in 0..DIM {
            ws.tmp[k] = x[k] + ws.k1[k] * half;
        }
        self.deriv(g[1].0, g[1].1, &ws.tmp.clone(), &mut ws.k2);
        for k in 0..DIM {
            ws.tmp[k] = x[k] + ws.k2[k] * half;
        }
        self.deriv(g[1].0, g[1].1, &ws.tmp.clone(), &mut ws.k3);
        for k in 0..DIM {
            ws.tmp[k] = x[k] + ws.k3[k] * dt;
        }
        self.deriv(g[2].0, g[2].1, &ws.tmp.clone(), &mut ws.k4);
        let sixth = dt / 6.0;
        let mut norm_sq = 0.0;
        for k in 0..DIM {
            let v = psi.0[k]
                + (ws.k1[k] + (ws.k2[k] + ws.k3[k]) * 2.0 + ws.k4[k]) * sixth;
            psi.0[k] = v;
            norm_sq += v.norm_sqr();
        }
        let inv = 1.0 / norm_sq.sqrt();
        for c in psi.0.iter_mut() {
            *c *= inv;
        }
        Ok(None)
    }

    /// Run one full trajectory from |I⟩. Deterministic given the seed.
    pub fn run(&self, seed: u64) -> Result<TrajectoryResult, StepError> {
        self.run_with_snapshots(seed, &[]).map(|(r, _)| r)
    }

    /// Run one trajectory, capturing the normalized state at the given step
    /// indices (time = index·dt). A trajectory that terminates early keeps its
    /// stationary final state for the remaining snapshots.
    pub fn run_with_snapshots(
        &self,
        seed: u64,
        snapshot_steps: &[u64],
    ) -> Result<(TrajectoryResult, Vec<StateVector>), StepError> {
        let p = &self.params;
        let dt = p.dt;
        let n_window = (p.t_total / dt).round() as u64;
        let n_max = (p.t_max / dt).round() as u64;

        // Coupling envelopes on the half-step grid of the pulse window.
        let mut envelopes = Vec::with_capacity(2 * n_window as usize + 1);
        for j in 0..=(2 * n_window) {
            envelopes.push(p.couplings_at(j as f64 * (0.5 * dt)));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ws = Workspace::new(self.jump_ops.len());
        let mut psi = StateVector::basis(0);
        let mut jumps: Vec<JumpEvent> = Vec::new();
        let mut snapshots: Vec<StateVector> = Vec::with_capacity(snapshot_steps.len());
        let mut mode2_emitted = false;
        let mut clean = false;

        let mut k = 0u64;
        while k < n_max {
            while snapshots.len() < snapshot_steps.len()
                && snapshot_steps[snapshots.len()] == k
            {
                snapshots.push(psi.clone());
            }
            let eps: f64 = rng.gen();
            let g = if k < n_window {
                let j = 2 * k as usize;
                [envelopes[j], envelopes[j + 1], envelopes[j + 2]]
            } else {
                [(0.0, 0.0); 3]
            };
            let t = k as f64 * dt;
            if let Some(mut ev) =
                self.step_inner(&mut psi, t, dt, g, eps, &mut ws, mode2_emitted)?
            {
                if matches!(ev.channel, JumpChannel::Cavity { mode: LongMode::Two, .. }) {
                    mode2_emitted = true;
                }
                ev.mode2_excitation = ev.mode2_excitation.min(1.0);
                jumps.push(ev);
                if self.excitation_expectation(&psi) < EXCITATION_EPS {
                    clean = true;
                    k += 1;
                    break;
                }
            }
            k += 1;
        }
        while snapshots.len() < snapshot_steps.len() {
            snapshots.push(psi.clone());
        }
        Ok((
            TrajectoryResult {
                jumps,
                terminated_cleanly: clean,
                final_state: psi,
                seed,
            },
            snapshots,
        ))
    }
}

impl StateVector {
    /// View over a borrowed buffer; helper for the jump application path.
    fn wrap(buf: &mut [C64; DIM]) -> StateVector {
        StateVector(*buf)
    }
}

/// Run a trajectory with the native jump set.
pub fn run_trajectory(
    params: &SystemParams,
    seed: u64,
) -> Result<TrajectoryResult, TrajectoryError> {
    let engine = McwfEngine::new(params)?;
    Ok(engine.run(seed)?)
}

/// Run `n_traj` independent trajectories; trajectory k uses
/// `child_seed(master_seed, k)`. The result order is fixed by k, independent
/// of worker count.
pub fn run_ensemble(
    params: &SystemParams,
    n_traj: usize,
    master_seed: u64,
) -> Result<Vec<TrajectoryResult>, TrajectoryError> {
    let engine = McwfEngine::new(params)?;
    let results: Result<Vec<TrajectoryResult>, StepError> = (0..n_traj as u64)
        .into_par_iter()
        .map(|k| engine.run(child_seed(master_seed, k)))
        .collect();
    Ok(results?)
}

/// Deterministic parallel fold over an ensemble: trajectories are processed
/// in fixed chunks and the per-chunk accumulators merged in chunk order, so
/// the result is independent of thread count even for float accumulators.
pub fn ensemble_fold<T, F, M>(
    engine: &McwfEngine,
    n_traj: usize,
    master_seed: u64,
    init: impl Fn() -> T + Sync,
    fold: F,
    merge: M,
) -> Result<T, StepError>
where
    T: Send,
    F: Fn(&mut T, TrajectoryResult) + Sync,
    M: Fn(&mut T, T),
{
    const CHUNK: usize = 64;
    let n_chunks = n_traj.div_ceil(CHUNK);
    let partials: Result<Vec<T>, StepError> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = ((ci + 1) * CHUNK).min(n_traj);
            let mut acc = init();
            for k in lo..hi {
                let traj = engine.run(child_seed(master_seed, k as u64))?;
                fold(&mut acc, traj);
            }
            Ok(acc)
        })
        .collect();
    let mut parts = partials?.into_iter();
    let mut total = parts.next().unwrap_or_else(&init);
    for p in parts {
        merge(&mut total, p);
    }
    Ok(total)
}

/// Ensemble-averaged projectors (1/n) Σ |ψ(t)⟩⟨ψ(t)| at the given times,
/// snapped to the step grid.
pub fn ensemble_mean_projectors(
    params: &SystemParams,
    n_traj: usize,
    master_seed: u64,
    sample_times: &[f64],
) -> Result<Vec<DenseMatrix>, TrajectoryError> {
    let engine = McwfEngine::new(params)?;
    let steps: Vec<u64> = sample_times
        .iter()
        .map(|&t| (t / params.dt).round() as u64)
        .collect();
    const CHUNK: usize = 64;
    let n_chunks = n_traj.div_ceil(CHUNK);
    let partials: Result<Vec<Vec<DenseMatrix>>, StepError> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = ((ci + 1) * CHUNK).min(n_traj);
            let mut acc: Vec<DenseMatrix> =
                (0..steps.len()).map(|_| DenseMatrix::zeros()).collect();
            for k in lo..hi {
                let (_, snaps) =
                    engine.run_with_snapshots(child_seed(master_seed, k as u64), &steps)?;
                for (a, s) in acc.iter_mut().zip(snaps.iter()) {
                    a.add_outer(s, 1.0);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut totals: Vec<DenseMatrix> = (0..steps.len()).map(|_| DenseMatrix::zeros()).collect();
    for part in partials? {
        for (t, p) in totals.iter_mut().zip(part.iter()) {
            t.add_scaled(p, C64::new(1.0, 0.0));
        }
    }
    let w = C64::new(1.0 / n_traj as f64, 0.0);
    for t in totals.iter_mut() {
        t.scale(w);
    }
    Ok(totals)
}

/// Write one CSV line per jump across an ensemble.
///
/// Header: `trajectory_index,time,channel,p_g2,p_m_minus,p_m_plus,p_ground,mode2_excitation`.
pub fn write_jump_records<W: std::io::Write>(
    w: &mut W,
    results: &[TrajectoryResult],
) -> std::io::Result<()> {
    writeln!(
        w,
        "trajectory_index,time,channel,p_g2,p_m_minus,p_m_plus,p_ground,mode2_excitation"
    )?;
    for (idx, r) in results.iter().enumerate() {
        for j in &r.jumps {
            let channel = match j.channel {
                JumpChannel::Cavity { mode, port } => {
                    format!("cavity{}_port{}", mode.index() + 1, port)
                }
                JumpChannel::Spontaneous { transition, pol } => format!(
                    "spont{}_{}",
                    transition.index() + 1,
                    match pol {
                        crate::model::Pol::Plus => "plus",
                        crate::model::Pol::Minus => "minus",
                    }
                ),
            };
            writeln!(
                w,
                "{},{:.6},{},{:.9},{:.9},{:.9},{:.9},{:.9}",
                idx,
                j.time,
                channel,
                j.atom_populations[0],
                j.atom_populations[1],
                j.atom_populations[2],
                j.atom_populations[3],
                j.mode2_excitation
            )?;
        }
    }
    Ok(())
}
