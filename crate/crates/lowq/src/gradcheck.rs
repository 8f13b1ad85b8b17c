//! Analytic gradients against central finite differences for every
//! quantum component, plus the vanishing-gradient demonstration.

use lowq_core::gradients::{finite_diff_grad, max_relative_error, param_shift_grad, ClipRange, DEFAULT_FD_STEP};
use lowq_core::param::ParamBuilder;
use lowq_core::qlayers::{QAttention, QAttentionSpec, QConv1d, QConvSpec, QConvVariant, QGruCell, QGruSpec};
use lowq_core::vqc::{reference_circuit, LowQubitSpec, LowQubitVqc, VqcConfig};
use lowq_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentError {
    pub name: &'static str,
    pub n_checked: usize,
    pub max_rel_err: f64,
}

impl ComponentError {
    pub fn passed(&self) -> bool {
        self.max_rel_err < TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub components: Vec<ComponentError>,
    pub vanishing: Vanishing,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.components.iter().all(ComponentError::passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.components.iter().filter(|c| !c.passed()).map(|c| c.name).collect()
    }
}

/// Mean |∂L/∂W_in| of one low-qubit VQC over a batch of random inputs in
/// three settings: clipped at unit input scale, unclipped at ×100, and
/// clipped at ×100.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vanishing {
    pub clipped: f64,
    pub unclipped_scaled: f64,
    pub clipped_scaled: f64,
}

impl Vanishing {
    pub fn ratio(&self) -> f64 {
        self.clipped / self.unclipped_scaled
    }
}

fn randv(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-bound..bound)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compares analytic parameter and input gradients of `objective` with
/// central differences. `analytic` returns `(d params, d input)`.
fn compare(
    name: &'static str,
    params: &[f64],
    x: &[f64],
    objective: impl Fn(&[f64], &[f64]) -> Result<f64>,
    analytic: (Vec<f64>, Vec<f64>),
) -> Result<ComponentError> {
    let fd_p = finite_diff_grad(|p| objective(p, x), params, DEFAULT_FD_STEP)?.into_inner();
    let fd_x = finite_diff_grad(|xx| objective(params, xx), x, DEFAULT_FD_STEP)?.into_inner();
    Ok(ComponentError {
        name,
        n_checked: params.len() + x.len(),
        max_rel_err: max_relative_error(&analytic.0, &fd_p).max(max_relative_error(&analytic.1, &fd_x)),
    })
}

fn check_vqc(nq: usize, depth: usize, rng: &mut ChaCha8Rng) -> Result<ComponentError> {
    let circuit = reference_circuit(VqcConfig::new(nq, depth)?)?;
    let params = randv(rng, circuit.n_params(), std::f64::consts::PI);
    let c = randv(rng, nq, 1.0);
    let mut analytic = vec![0.0; params.len()];
    for (q, cq) in c.iter().enumerate() {
        for (a, g) in analytic
            .iter_mut()
            .zip(param_shift_grad(&circuit, &params, q)?.into_inner())
        {
            *a += cq * g;
        }
    }
    let objective = |p: &[f64], _: &[f64]| -> Result<f64> {
        let s = circuit.run(p)?;
        (0..nq).map(|q| s.expectation_z(q).map(|e| c[q] * e)).sum()
    };
    compare("vqc", &params, &[], objective, (analytic, Vec::new()))
}

fn check_lowqubit(nq: usize, depth: usize, seed: u64, rng: &mut ChaCha8Rng) -> Result<ComponentError> {
    let mut b = ParamBuilder::new(seed);
    let unit = LowQubitVqc::new(&mut b, "unit", LowQubitSpec::new(6, nq, 3).depth(depth))?;
    let params = b.finish().1;
    let x = randv(rng, 6, 1.0);
    let c = randv(rng, 3, 1.0);
    let (_, tr) = unit.forward(&params, &x)?;
    let mut g = vec![0.0; params.len()];
    let dx = unit.backward(&params, &tr, &c, &mut g)?;
    let objective = |p: &[f64], x: &[f64]| Ok(dot(&c, &unit.forward(p, x)?.0));
    compare("lowqubit_vqc", &params, &x, objective, (g, dx))
}

fn check_qconv(nq: usize, depth: usize, seed: u64, rng: &mut ChaCha8Rng) -> Result<ComponentError> {
    let mut b = ParamBuilder::new(seed);
    let spec = QConvSpec::new(2, 3, 3, 2)
        .variant(QConvVariant::LowQubit(nq))
        .depth(depth);
    let layer = QConv1d::new(&mut b, "qconv", spec)?;
    let params = b.finish().1;
    let x = randv(rng, 2 * 9, 1.0);
    let (y, tr) = layer.forward(&params, &x)?;
    let c = randv(rng, y.len(), 1.0);
    let mut g = vec![0.0; params.len()];
    let dx = layer.backward(&params, &tr, &c, &mut g, true)?.unwrap_or_default();
    let objective = |p: &[f64], x: &[f64]| Ok(dot(&c, &layer.forward(p, x)?.0));
    compare("qconv1d", &params, &x, objective, (g, dx))
}

fn check_qgru(nq: usize, depth: usize, seed: u64, rng: &mut ChaCha8Rng) -> Result<ComponentError> {
    const STEPS: usize = 3;
    let (n_in, hidden) = (2, 3);
    let mut b = ParamBuilder::new(seed);
    let cell = QGruCell::new(&mut b, "qgru", QGruSpec::new(n_in, hidden, nq).depth(depth))?;
    let params = b.finish().1;
    let x = randv(rng, STEPS * n_in, 1.0);
    let h0 = randv(rng, hidden, 0.5);
    let cy: Vec<Vec<f64>> = (0..STEPS).map(|_| randv(rng, hidden, 1.0)).collect();
    let ch = randv(rng, hidden, 1.0);
    let split = |x: &[f64]| -> Vec<Vec<f64>> { x.chunks(n_in).map(<[f64]>::to_vec).collect() };
    let objective = |p: &[f64], x: &[f64]| -> Result<f64> {
        let (ys, h, _) = cell.forward_sequence(p, &split(x), &h0)?;
        Ok(ys.iter().zip(&cy).map(|(y, c)| dot(y, c)).sum::<f64>() + dot(&h, &ch))
    };
    let (_, _, tr) = cell.forward_sequence(&params, &split(&x), &h0)?;
    let mut g = vec![0.0; params.len()];
    let (dxs, _) = cell.backward_sequence(&params, &tr, &cy, &ch, &mut g)?;
    compare("qgru", &params, &x, objective, (g, dxs.concat()))
}

fn check_qattention(nq: usize, depth: usize, seed: u64, rng: &mut ChaCha8Rng) -> Result<ComponentError> {
    let (seq, d, heads) = (2, 4, 2);
    let mut b = ParamBuilder::new(seed);
    let layer = QAttention::new(&mut b, "attn", QAttentionSpec::new(d, heads, nq).depth(depth))?;
    let params = b.finish().1;
    let x = randv(rng, seq * d, 1.0);
    let (y, tr) = layer.forward(&params, &x)?;
    let c = randv(rng, y.len(), 1.0);
    let mut g = vec![0.0; params.len()];
    let dx = layer.backward(&params, &tr, &c, &mut g)?;
    let objective = |p: &[f64], x: &[f64]| Ok(dot(&c, &layer.forward(p, x)?.0));
    compare("qattention", &params, &x, objective, (g, dx))
}

pub fn vanishing(nq: usize, seed: u64) -> Result<Vanishing> {
    const N_IN: usize = 16;
    const BATCH: usize = 32;
    let unit = |clip: Option<ClipRange>| -> Result<(LowQubitVqc, Vec<f64>)> {
        let mut b = ParamBuilder::new(seed);
        let u = LowQubitVqc::new(&mut b, "enc", LowQubitSpec::new(N_IN, nq, 4).clip(clip))?;
        Ok((u, b.finish().1))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let xs: Vec<Vec<f64>> = (0..BATCH).map(|_| randv(&mut rng, N_IN, 1.0)).collect();
    let c = randv(&mut rng, 4, 1.0);
    let mean_abs = |clip: Option<ClipRange>, scale: f64| -> Result<f64> {
        let (u, params) = unit(clip)?;
        let mut g = vec![0.0; params.len()];
        for x in &xs {
            let x: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let (_, tr) = u.forward(&params, &x)?;
            u.backward(&params, &tr, &c, &mut g)?;
        }
        let w = u.w_in().of(&g);
        Ok(w.iter().map(|v| v.abs()).sum::<f64>() / (w.len() * BATCH) as f64)
    };
    Ok(Vanishing {
        clipped: mean_abs(Some(ClipRange::DEFAULT), 1.0)?,
        unclipped_scaled: mean_abs(None, 100.0)?,
        clipped_scaled: mean_abs(Some(ClipRange::DEFAULT), 100.0)?,
    })
}

pub fn run_gradcheck(nq: usize, depth: usize, seed: u64) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let components = vec![
        check_vqc(nq, depth, &mut rng)?,
        check_lowqubit(nq, depth, seed, &mut rng)?,
        check_qconv(nq, depth, seed, &mut rng)?,
        check_qgru(nq, depth, seed, &mut rng)?,
        check_qattention(nq, depth, seed, &mut rng)?,
    ];
    Ok(GradcheckReport {
        components,
        vanishing: vanishing(nq, seed)?,
    })
}
