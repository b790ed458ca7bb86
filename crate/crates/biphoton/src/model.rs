//! Physical parameterization of the pair source: pulse envelopes, the
//! rotating-frame Hamiltonian, decay channels, and the special states of the
//! five-state manifold.
//!
//! All rates and detunings are expressed in units of the peak vacuum Rabi
//! frequency g, all times in units of 1/g.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::hilbert::{
    annihilation, atom_projector, atomic_lowering, number_op, AtomLevel, BasisIndex, LongMode,
    ModeLabel, Pol, SparseOp, StateVector, DIM,
};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("mixing angle undefined: g1 = g2 = 0")]
    UndefinedMixingAngle,
}

/// Gaussian coupling-pulse pair with the counterintuitive STIRAP ordering:
/// mode 2 is switched on first (`peak2 < peak1` for positive delay).
///
/// Envelopes are hard-gated to the protocol window [0, `window`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PulsePair {
    /// Full width at half maximum of each Gaussian [1/g].
    pub fwhm: f64,
    /// Peak-time separation t_d; g₁ peaks after g₂ [1/g].
    pub delay: f64,
    /// Peak time of the mode-1 coupling [1/g].
    pub peak1: f64,
    /// Peak time of the mode-2 coupling [1/g].
    pub peak2: f64,
    /// Peak coupling values [units of g].
    pub amplitude1: f64,
    pub amplitude2: f64,
    /// Hard gate: envelopes vanish outside [0, window].
    pub window: f64,
}

impl PulsePair {
    /// Symmetric layout inside the window: peak₂ = window/2 − delay/2,
    /// peak₁ = window/2 + delay/2.
    pub fn centered(fwhm: f64, delay: f64, window: f64) -> PulsePair {
        PulsePair {
            fwhm,
            delay,
            peak1: window / 2.0 + delay / 2.0,
            peak2: window / 2.0 - delay / 2.0,
            amplitude1: 1.0,
            amplitude2: 1.0,
            window,
        }
    }

    pub fn with_amplitudes(mut self, a1: f64, a2: f64) -> PulsePair {
        self.amplitude1 = a1;
        self.amplitude2 = a2;
        self
    }

    fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * (2.0f64).ln()).sqrt())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.fwhm > 0.0) {
            return Err(ModelError::InvalidParams("pulse fwhm must be > 0".into()));
        }
        if self.amplitude1 < 0.0 || self.amplitude2 < 0.0 {
            return Err(ModelError::InvalidParams(
                "pulse amplitudes must be ≥ 0".into(),
            ));
        }
        if !(self.window > 0.0) {
            return Err(ModelError::InvalidParams("pulse window must be > 0".into()));
        }
        Ok(())
    }
}

/// Coupling envelope g_i(t): a truncated Gaussian, exactly zero outside the
/// protocol window.
pub fn pulse_amplitude(t: f64, which: LongMode, pulses: &PulsePair) -> f64 {
    if t < 0.0 || t > pulses.window {
        return 0.0;
    }
    let (peak, amp) = match which {
        LongMode::One => (pulses.peak1, pulses.amplitude1),
        LongMode::Two => (pulses.peak2, pulses.amplitude2),
    };
    let s = pulses.sigma();
    let x = (t - peak) / s;
    amp * (-0.5 * x * x).exp()
}

/// All physical rates, detunings and timing of one simulation run.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SystemParams {
    /// Peak vacuum Rabi frequency; the frequency unit (g ≡ 1).
    pub g: f64,
    /// Cavity field decay rate κ [g].
    pub kappa: f64,
    /// Spontaneous decay rate Γ per transition [g].
    pub gamma: f64,
    /// Detuning Δ₁ of mode 1 [g].
    pub delta1: f64,
    /// Detuning Δ₂ of mode 2 [g].
    pub delta2: f64,
    pub pulses: PulsePair,
    /// Protocol window duration [1/g].
    pub t_total: f64,
    /// Integrator step [1/g].
    pub dt: f64,
    /// Hard simulation cutoff [1/g].
    pub t_max: f64,
}

/// Ceiling on the automatic post-window tail, [1/g].
pub const TAIL_CEILING: f64 = 2000.0;

impl SystemParams {
    /// Default protocol: window gt = 100, fwhm = delay = 27, centered pulses,
    /// unit amplitudes, g·dt = 10⁻³, automatic t_max.
    pub fn standard(kappa: f64, gamma: f64, delta1: f64, delta2: f64) -> SystemParams {
        let t_total = 100.0;
        let pulses = PulsePair::centered(27.0, 27.0, t_total);
        SystemParams {
            g: 1.0,
            kappa,
            gamma,
            delta1,
            delta2,
            pulses,
            t_total,
            dt: 1e-3,
            t_max: t_total + auto_tail(kappa, gamma),
        }
    }

    /// Recompute `t_max` from the automatic tail rule:
    /// t_total + 10/min(positive decay rates), capped at [`TAIL_CEILING`].
    pub fn with_auto_t_max(mut self) -> SystemParams {
        self.t_max = self.t_total + auto_tail(self.kappa, self.gamma);
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.pulses.validate()?;
        if self.kappa < 0.0 || self.gamma < 0.0 {
            return Err(ModelError::InvalidParams("κ and Γ must be ≥ 0".into()));
        }
        if !(self.dt > 0.0) {
            return Err(ModelError::InvalidParams("dt must be > 0".into()));
        }
        if !(self.t_total > 0.0) {
            return Err(ModelError::InvalidParams("t_total must be > 0".into()));
        }
        if self.t_max < self.t_total {
            return Err(ModelError::InvalidParams("t_max must be ≥ t_total".into()));
        }
        if !(self.g > 0.0) {
            return Err(ModelError::InvalidParams("g must be > 0".into()));
        }
        Ok(())
    }

    /// g₁(t) and g₂(t) including the overall unit g.
    pub fn couplings_at(&self, t: f64) -> (f64, f64) {
        (
            self.g * pulse_amplitude(t, LongMode::One, &self.pulses),
            self.g * pulse_amplitude(t, LongMode::Two, &self.pulses),
        )
    }
}

fn auto_tail(kappa: f64, gamma: f64) -> f64 {
    let min_rate = [kappa, gamma]
        .into_iter()
        .filter(|r| *r > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_rate.is_finite() {
        (10.0 / min_rate).min(TAIL_CEILING)
    } else {
        0.0
    }
}

/// Coupling generator for one longitudinal mode at unit strength:
/// Σ_α (a†_{iα} S_{iα} + a_{iα} S†_{iα}).
pub fn coupling_generator(mode: LongMode) -> SparseOp {
    let mut op = SparseOp::zero();
    for pol in [Pol::Plus, Pol::Minus] {
        let a = annihilation(ModeLabel { long: mode, pol });
        let s = atomic_lowering(mode, pol);
        let term = a.dagger().matmul(&s);
        op = op.add(&term).add(&term.dagger());
    }
    op
}

/// Diagonal rotating-frame energies: E(|0″₀⟩) = 0, E(|1′₋₁⟩) = E(|1′₁⟩) = −Δ₂,
/// E(|0₀⟩) = −(Δ₁ + Δ₂); photons carry zero energy.
///
/// Relative to |I⟩ this puts the bright/dark manifold at +Δ₁ and |E±⟩ at
/// Δ₁ + Δ₂, so the two-photon resonance Δ₁ = −Δ₂ pins the transfer manifold
/// at zero energy.
pub fn detuning_diagonal(params: &SystemParams) -> [f64; DIM] {
    let mut d = [0.0; DIM];
    for (k, e) in d.iter_mut().enumerate() {
        *e = match BasisIndex::from_flat(k).atom {
            AtomLevel::G2 => -(params.delta1 + params.delta2),
            AtomLevel::MMinus | AtomLevel::MPlus => -params.delta2,
            AtomLevel::Ground => 0.0,
        };
    }
    d
}

/// Total decay rate per basis state, the diagonal of Σ_m L†_m L_m:
/// Γ·(open spontaneous channels of the atomic level) + κ·(photon number).
pub fn decay_diagonal(params: &SystemParams) -> [f64; DIM] {
    let mut d = [0.0; DIM];
    for (k, r) in d.iter_mut().enumerate() {
        let b = BasisIndex::from_flat(k);
        let spont = match b.atom {
            AtomLevel::G2 => 2.0,
            AtomLevel::MMinus | AtomLevel::MPlus => 1.0,
            AtomLevel::Ground => 0.0,
        };
        *r = params.gamma * spont + params.kappa * b.photon_number() as f64;
    }
    d
}

/// Rotating-frame Hamiltonian H(t) = g₁(t)·C₁ + g₂(t)·C₂ + detuning diagonal.
/// Hermitian; a pure function of (t, params).
pub fn hamiltonian(t: f64, params: &SystemParams) -> SparseOp {
    let (g1, g2) = params.couplings_at(t);
    hamiltonian_with_couplings(g1, g2, params)
}

/// Same as [`hamiltonian`] but with explicit constant couplings, used by the
/// analytic invariant checks.
pub fn hamiltonian_with_couplings(g1: f64, g2: f64, params: &SystemParams) -> SparseOp {
    let diag = detuning_diagonal(params);
    let mut diag_c = [C64::new(0.0, 0.0); DIM];
    for (dc, &e) in diag_c.iter_mut().zip(diag.iter()) {
        *dc = C64::new(e, 0.0);
    }
    coupling_generator(LongMode::One)
        .scaled(C64::new(g1, 0.0))
        .add(&coupling_generator(LongMode::Two).scaled(C64::new(g2, 0.0)))
        .add(&SparseOp::from_diagonal(&diag_c))
}

/// One decay channel: the scaled Lindblad operator √rate·(bare operator).
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub channel: JumpChannel,
    /// Decay rate of the channel (κ or Γ).
    pub rate: f64,
    /// √rate × bare operator.
    pub op: SparseOp,
    pub label: String,
}

/// Identity of a decay channel.
///
/// Cavity channels carry a detection `port` (0 or 1): in the native circular
/// basis port 0 detects σ⁺ and port 1 detects σ⁻; analyzer-rotated jump sets
/// reuse the same ports for their two orthogonal output vectors.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum JumpChannel {
    Cavity { mode: LongMode, port: u8 },
    Spontaneous { transition: LongMode, pol: Pol },
}

impl JumpChannel {
    pub fn is_cavity(self) -> bool {
        matches!(self, JumpChannel::Cavity { .. })
    }
}

/// The eight native decay channels: √κ a_{iα} and √Γ S_{iα}.
pub fn jump_operators(params: &SystemParams) -> Vec<JumpOperator> {
    let mut ops = Vec::with_capacity(8);
    for mode in ModeLabel::ALL {
        let sign = if mode.pol == Pol::Plus { "+" } else { "-" };
        ops.push(JumpOperator {
            channel: JumpChannel::Cavity {
                mode: mode.long,
                port: mode.pol.index() as u8,
            },
            rate: params.kappa,
            op: annihilation(mode).scaled(C64::new(params.kappa.sqrt(), 0.0)),
            label: format!("cav{}{}", mode.long.index() + 1, sign),
        });
    }
    for mode in ModeLabel::ALL {
        let sign = if mode.pol == Pol::Plus { "+" } else { "-" };
        ops.push(JumpOperator {
            channel: JumpChannel::Spontaneous {
                transition: mode.long,
                pol: mode.pol,
            },
            rate: params.gamma,
            op: atomic_lowering(mode.long, mode.pol)
                .scaled(C64::new(params.gamma.sqrt(), 0.0)),
            label: format!("sp{}{}", mode.long.index() + 1, sign),
        });
    }
    ops
}

/// Non-Hermitian effective Hamiltonian H(t) − (i/2) Σ_m L†_m L_m.
pub fn effective_hamiltonian(t: f64, params: &SystemParams) -> SparseOp {
    let decay = decay_diagonal(params);
    let mut diag = [C64::new(0.0, 0.0); DIM];
    for (d, &r) in diag.iter_mut().zip(decay.iter()) {
        *d = C64::new(0.0, -0.5 * r);
    }
    hamiltonian(t, params).add(&SparseOp::from_diagonal(&diag))
}

/// Excitation number N = 2|0₀⟩⟨0₀| + |1′₋₁⟩⟨1′₋₁| + |1′₁⟩⟨1′₁| + Σ a†_{iα}a_{iα}.
/// Conserved by the coupling Hamiltonian; each quantum jump removes one unit.
pub fn excitation_number() -> SparseOp {
    let mut op = atom_projector(AtomLevel::G2).scaled(C64::new(2.0, 0.0));
    op = op
        .add(&atom_projector(AtomLevel::MMinus))
        .add(&atom_projector(AtomLevel::MPlus));
    for mode in ModeLabel::ALL {
        op = op.add(&number_op(mode));
    }
    op
}

/// Diagonal of [`excitation_number`] as plain reals.
pub fn excitation_diagonal() -> [f64; DIM] {
    let mut d = [0.0; DIM];
    for (k, e) in d.iter_mut().enumerate() {
        let b = BasisIndex::from_flat(k);
        let atom = match b.atom {
            AtomLevel::G2 => 2,
            AtomLevel::MMinus | AtomLevel::MPlus => 1,
            AtomLevel::Ground => 0,
        };
        *e = (atom + b.photon_number()) as f64;
    }
    d
}

/// Labels of the named manifold states.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum SpecialState {
    /// |I⟩ = |0₀⟩ ⊗ vacuum, the initial state.
    Initial,
    /// Bright combination of the intermediate levels and one mode-1 photon.
    Bright,
    /// Dark combination, decoupled from the transfer chain.
    Dark,
    /// Bell state |E⁺⟩: one photon per mode, anti-correlated polarizations.
    BellPlus,
    /// Bell state |E⁻⟩.
    BellMinus,
    /// Transfer eigenstate |Λ(θ)⟩ = cos θ|I⟩ − sin θ|E⁺⟩.
    Lambda(f64),
}

/// Normalized vector of a named manifold state.
pub fn special_state(label: SpecialState) -> StateVector {
    let basis = |atom: AtomLevel, occ: [u8; 4]| BasisIndex::new(atom, occ).flat();
    let i_flat = basis(AtomLevel::G2, [0, 0, 0, 0]);
    let b1 = basis(AtomLevel::MMinus, [1, 0, 0, 0]);
    let b2 = basis(AtomLevel::MPlus, [0, 1, 0, 0]);
    let e1 = basis(AtomLevel::Ground, [1, 0, 0, 1]);
    let e2 = basis(AtomLevel::Ground, [0, 1, 1, 0]);
    let inv = 1.0 / SQRT2;
    let mut v = StateVector::zero();
    match label {
        SpecialState::Initial => v.0[i_flat] = C64::new(1.0, 0.0),
        SpecialState::Bright => {
            v.0[b1] = C64::new(inv, 0.0);
            v.0[b2] = C64::new(inv, 0.0);
        }
        SpecialState::Dark => {
            v.0[b1] = C64::new(inv, 0.0);
            v.0[b2] = C64::new(-inv, 0.0);
        }
        SpecialState::BellPlus => {
            v.0[e1] = C64::new(inv, 0.0);
            v.0[e2] = C64::new(inv, 0.0);
        }
        SpecialState::BellMinus => {
            v.0[e1] = C64::new(inv, 0.0);
            v.0[e2] = C64::new(-inv, 0.0);
        }
        SpecialState::Lambda(theta) => {
            v.0[i_flat] = C64::new(theta.cos(), 0.0);
            v.0[e1] = C64::new(-theta.sin() * inv, 0.0);
            v.0[e2] = C64::new(-theta.sin() * inv, 0.0);
        }
    }
    v
}

/// The five manifold states in report order: I, B, D, E⁺, E⁻.
pub fn manifold_states() -> [StateVector; 5] {
    [
        special_state(SpecialState::Initial),
        special_state(SpecialState::Bright),
        special_state(SpecialState::Dark),
        special_state(SpecialState::BellPlus),
        special_state(SpecialState::BellMinus),
    ]
}

/// STIRAP mixing angle θ = atan2(√2 g₁, g₂) ∈ [0, π/2] for non-negative
/// couplings. Undefined when both couplings vanish.
pub fn mixing_angle(g1: f64, g2: f64) -> Result<f64, ModelError> {
    if g1 == 0.0 && g2 == 0.0 {
        return Err(ModelError::UndefinedMixingAngle);
    }
    Ok((SQRT2 * g1).atan2(g2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::expectation;
    use std::f64::consts::FRAC_PI_2;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pulse_peak_and_half_maximum() {
        let p = PulsePair::centered(27.0, 27.0, 100.0);
        assert!(approx(p.peak2, 36.5, 1e-12));
        assert!(approx(p.peak1, 63.5, 1e-12));
        let at_peak = pulse_amplitude(p.peak2, LongMode::Two, &p);
        assert!(approx(at_peak, p.amplitude2, 1e-12));
        let at_half = pulse_amplitude(p.peak2 + p.fwhm / 2.0, LongMode::Two, &p);
        assert!(approx(at_half, p.amplitude2 / 2.0, 1e-12));
    }

    #[test]
    fn pulse_is_gated_to_window() {
        let p = PulsePair::centered(27.0, 27.0, 100.0);
        assert_eq!(pulse_amplitude(-0.001, LongMode::One, &p), 0.0);
        assert_eq!(pulse_amplitude(100.001, LongMode::One, &p), 0.0);
        assert!(pulse_amplitude(99.999, LongMode::One, &p) > 0.0);
    }

    #[test]
    fn auto_tail_rule() {
        let p = SystemParams::standard(1.0, 0.01, 0.0, 0.0);
        assert!(approx(p.t_max, 100.0 + 1000.0, 1e-9));
        let closed = SystemParams::standard(0.0, 0.0, 0.0, 0.0);
        assert!(approx(closed.t_max, 100.0, 1e-12));
        let capped = SystemParams::standard(1e-4, 0.0, 0.0, 0.0);
        assert!(approx(capped.t_max, 100.0 + TAIL_CEILING, 1e-9));
    }

    #[test]
    fn hamiltonian_matrix_elements_match_manifold_pattern() {
        let params = SystemParams::standard(0.5, 0.01, 3.0, -3.0);
        let t = 40.0;
        let h = hamiltonian(t, &params);
        let (g1, g2) = params.couplings_at(t);
        let sts = manifold_states();
        let (i, b, d, ep, em) = (&sts[0], &sts[1], &sts[2], &sts[3], &sts[4]);
        let elem = |bra: &StateVector, ket: &StateVector| -> C64 {
            let hket = h.apply(ket);
            bra.inner(&hket)
        };
        assert!(approx(elem(b, i).norm(), SQRT2 * g1, 1e-12));
        assert!(approx(elem(b, ep).norm(), g2, 1e-12));
        assert!(approx(elem(d, em).norm(), g2, 1e-12));
        assert!(elem(d, i).norm() < 1e-14);
        assert!(elem(d, ep).norm() < 1e-14);
        assert!(elem(b, em).norm() < 1e-14);
    }

    #[test]
    fn hamiltonian_is_hermitian_at_random_times() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let params = SystemParams::standard(2.0, 0.01, 15.0, -15.0);
        for _ in 0..100 {
            let t: f64 = rng.gen::<f64>() * params.t_total;
            assert!(hamiltonian(t, &params).hermiticity_error() < 1e-14);
        }
    }

    #[test]
    fn coupling_conserves_excitation_number() {
        let params = SystemParams::standard(1.0, 0.01, 7.0, -7.0);
        let n = excitation_number();
        for &t in &[0.0, 25.0, 36.5, 50.0, 63.5, 90.0] {
            let h = hamiltonian(t, &params);
            let comm = h.matmul(&n).add(&n.matmul(&h).scaled(C64::new(-1.0, 0.0)));
            assert!(comm.max_abs() < 1e-12, "[H, N] must vanish at t={t}");
        }
    }

    #[test]
    fn jump_operator_structure() {
        let params = SystemParams::standard(0.8, 0.05, 0.0, 0.0);
        let ops = jump_operators(&params);
        assert_eq!(ops.len(), 8);
        // All L†L diagonal in the product basis.
        for j in &ops {
            assert!(j.op.dagger().matmul(&j.op).is_diagonal(), "{}", j.label);
        }
        // √κ a₁₊ applied to |B⟩ leaves the atom in |1′₋₁⟩ with all modes empty.
        let b = special_state(SpecialState::Bright);
        let a1p = &ops[0];
        assert!(matches!(
            a1p.channel,
            JumpChannel::Cavity { mode: LongMode::One, port: 0 }
        ));
        let mut post = a1p.op.apply(&b);
        post.normalize();
        let target = BasisIndex::new(AtomLevel::MMinus, [0, 0, 0, 0]).flat();
        assert!(approx(post.population(target), 1.0, 1e-12));
        // √Γ S₂₋ sends |1′₋₁⟩ ⊗ |Ω⟩ to √Γ |0″₀⟩ ⊗ |Ω⟩.
        let s2m = ops
            .iter()
            .find(|j| {
                j.channel
                    == JumpChannel::Spontaneous { transition: LongMode::Two, pol: Pol::Minus }
            })
            .unwrap();
        let src = StateVector::basis(BasisIndex::new(AtomLevel::MMinus, [0, 0, 0, 0]).flat());
        let out = s2m.op.apply(&src);
        let dst = BasisIndex::new(AtomLevel::Ground, [0, 0, 0, 0]).flat();
        assert!(approx(out.0[dst].re, params.gamma.sqrt(), 1e-12));
        assert!(approx(out.norm_sq(), params.gamma, 1e-12));
    }

    #[test]
    fn effective_hamiltonian_anti_hermitian_part() {
        let params = SystemParams::standard(0.7, 0.2, 2.0, -2.0);
        // κ = Γ = 0 reduces to the Hermitian Hamiltonian exactly.
        let closed = SystemParams::standard(0.0, 0.0, 2.0, -2.0);
        let diff = effective_hamiltonian(30.0, &closed)
            .add(&hamiltonian(30.0, &closed).scaled(C64::new(-1.0, 0.0)));
        assert_eq!(diff.nnz(), 0);

        // ⟨I|H_eff|I⟩ = −iΓ: two open spontaneous channels on the cascade top.
        let heff = effective_hamiltonian(0.0, &params);
        let i_state = special_state(SpecialState::Initial);
        let e = expectation(&heff, &i_state);
        assert!(approx(e.im, -params.gamma, 1e-12));

        // ⟨E⁺|anti-Hermitian part|E⁺⟩ = −iκ: one photon per longitudinal mode.
        let ep = special_state(SpecialState::BellPlus);
        let h = hamiltonian(0.0, &params);
        let anti = heff.add(&h.scaled(C64::new(-1.0, 0.0)));
        let e = expectation(&anti, &ep);
        assert!(approx(e.im, -params.kappa, 1e-12));
        assert!(e.re.abs() < 1e-12);

        // Anti-Hermitian part equals −(i/2) Σ L†L exactly.
        let mut sum = SparseOp::zero();
        for j in jump_operators(&params) {
            sum = sum.add(&j.op.dagger().matmul(&j.op));
        }
        let expected = sum.scaled(C64::new(0.0, -0.5));
        let resid = anti.add(&expected.scaled(C64::new(-1.0, 0.0)));
        assert!(resid.max_abs() < 1e-14);
    }

    #[test]
    fn special_states_match_definitions() {
        let lambda0 = special_state(SpecialState::Lambda(0.0));
        let i_state = special_state(SpecialState::Initial);
        assert!(approx(lambda0.inner(&i_state).norm(), 1.0, 1e-12));

        // Λ(π/2) = −|E⁺⟩ up to the recorded global sign.
        let lambda_half = special_state(SpecialState::Lambda(FRAC_PI_2));
        let ep = special_state(SpecialState::BellPlus);
        assert!(approx(lambda_half.inner(&ep).norm(), 1.0, 1e-12));
        assert!(approx(lambda_half.inner(&ep).re, -1.0, 1e-12));

        let em = special_state(SpecialState::BellMinus);
        assert!(ep.inner(&em).norm() < 1e-14);
        let b = special_state(SpecialState::Bright);
        let d = special_state(SpecialState::Dark);
        assert!(b.inner(&d).norm() < 1e-14);
        for s in manifold_states() {
            assert!(approx(s.norm(), 1.0, 1e-12));
        }
    }

    #[test]
    fn mixing_angle_limits() {
        assert!(approx(mixing_angle(0.0, 1.0).unwrap(), 0.0, 1e-15));
        assert!(approx(mixing_angle(1.0, 0.0).unwrap(), FRAC_PI_2, 1e-15));
        assert!(approx(mixing_angle(1.0, SQRT2).unwrap(), FRAC_PI_2 / 2.0, 1e-15));
        assert!(mixing_angle(0.0, 0.0).is_err());
    }

    #[test]
    fn dark_state_decouples_from_bright() {
        // |Λ(θ)⟩ is a zero-energy eigenstate on the manifold at two-photon
        // resonance for θ = atan2(√2 g₁, g₂).
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let g1: f64 = rng.gen::<f64>() * 1.5;
            let g2: f64 = rng.gen::<f64>() * 1.5 + 1e-6;
            let delta: f64 = (rng.gen::<f64>() - 0.5) * 30.0;
            let params = SystemParams::standard(0.0, 0.0, delta, -delta);
            let h = hamiltonian_with_couplings(g1, g2, &params);
            let theta = mixing_angle(g1, g2).unwrap();
            let lambda = special_state(SpecialState::Lambda(theta));
            let b = special_state(SpecialState::Bright);
            let h_lambda = h.apply(&lambda);
            assert!(b.inner(&h_lambda).norm() < 1e-12);
            assert!(lambda.inner(&h_lambda).norm() < 1e-12);
        }
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut p = SystemParams::standard(1.0, 0.01, 0.0, 0.0);
        p.dt = 0.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::standard(1.0, 0.01, 0.0, 0.0);
        p.kappa = -1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::standard(1.0, 0.01, 0.0, 0.0);
        p.t_max = 50.0;
        assert!(p.validate().is_err());
        assert!(SystemParams::standard(1.0, 0.01, 5.0, -5.0).validate().is_ok());
    }
}
