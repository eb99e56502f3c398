//! Single-layer LSTM regressor over fixed-length windows, trained by
//! backpropagation through time with Adam.
//!
//! Parameters are stored in one flat vector:
//!
//! | block | shape | layout |
//! |-------|-------|--------|
//! | `W`   | 4H x F | gate order i, f, o, g; row-major |
//! | `U`   | 4H x H | same |
//! | `b`   | 4H    | same gate order |
//! | head  | H     | |
//! | output bias | 1 | |

use chrono::NaiveDate;
use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng as _;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmConfig {
    pub window_length: usize,
    pub hidden_size: usize,
    pub epochs: usize,
    pub step_size: f64,
    pub gradient_clip_norm: f64,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self { window_length: 6, hidden_size: 16, epochs: 500, step_size: 0.01, gradient_clip_norm: 5.0, seed: 0 }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_length == 0 || self.hidden_size == 0 || self.epochs == 0 {
            return Err(Error::config("lstm window_length, hidden_size and epochs must be positive"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::config("lstm step_size must be positive"));
        }
        if !(self.gradient_clip_norm.is_finite() && self.gradient_clip_norm > 0.0) {
            return Err(Error::config("lstm gradient_clip_norm must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<T> {
    hidden: usize,
    features: usize,
    data: Vec<T>,
}

impl<T: Scalar> LstmParams<T> {
    pub fn n_params(hidden: usize, features: usize) -> usize {
        4 * hidden * (features + hidden + 1) + hidden + 1
    }

    pub fn zeros(hidden: usize, features: usize) -> Self {
        Self { hidden, features, data: vec![T::zero(); Self::n_params(hidden, features)] }
    }

    /// Uniform in `[-1/sqrt(H), 1/sqrt(H)]`.
    pub fn init(hidden: usize, features: usize, seed: u64) -> Self {
        let s = 1.0 / (hidden as f64).sqrt();
        let mut rng = crate::seed::rng_from(seed);
        let data = (0..Self::n_params(hidden, features)).map(|_| T::lit(s * (2.0 * rng.random::<f64>() - 1.0))).collect();
        Self { hidden, features, data }
    }

    pub fn from_vec(hidden: usize, features: usize, data: Vec<T>) -> Result<Self> {
        let n = Self::n_params(hidden, features);
        if data.len() != n {
            return Err(Error::dim(n, data.len()));
        }
        Ok(Self { hidden, features, data })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn n_features(&self) -> usize {
        self.features
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    fn offsets(&self) -> (usize, usize, usize, usize) {
        let (h, f) = (self.hidden, self.features);
        let u = 4 * h * f;
        let b = u + 4 * h * h;
        let head = b + 4 * h;
        (u, b, head, head + h)
    }

    pub fn w(&self) -> &[T] {
        &self.data[..self.offsets().0]
    }

    pub fn u(&self) -> &[T] {
        let (u, b, _, _) = self.offsets();
        &self.data[u..b]
    }

    pub fn b(&self) -> &[T] {
        let (_, b, head, _) = self.offsets();
        &self.data[b..head]
    }

    pub fn head(&self) -> &[T] {
        let (_, _, head, out) = self.offsets();
        &self.data[head..out]
    }

    pub fn output_bias(&self) -> T {
        self.data[self.data.len() - 1]
    }

    pub fn set_output_bias(&mut self, v: T) {
        let n = self.data.len();
        self.data[n - 1] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Text checkpoint: a shape header then one value per line.
    pub fn to_checkpoint(&self) -> String {
        let mut out = format!("lstm hidden={} features={} gates=i,f,o,g layout=row-major\n", self.hidden, self.features);
        for v in &self.data {
            out.push_str(&format!("{v:e}\n"));
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::Empty("lstm checkpoint"))?;
        let field = |key: &str| -> Result<usize> {
            header
                .split_whitespace()
                .find_map(|tok| tok.strip_prefix(key))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse { line: 1, message: format!("checkpoint header lacks {key}") })
        };
        let (hidden, features) = (field("hidden=")?, field("features=")?);
        let data = lines
            .enumerate()
            .map(|(k, l)| {
                l.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Parse { line: k + 2, message: e.to_string() })
            })
            .collect::<Result<Vec<T>>>()?;
        Self::from_vec(hidden, features, data)
    }
}

/// Windows of consecutive scaled feature rows with the target at each window's last month.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet<T> {
    pub windows: Vec<Array2<T>>,
    pub labels: Vec<T>,
    pub end_dates: Vec<NaiveDate>,
}

impl<T: Scalar> WindowSet<T> {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            windows: idx.iter().map(|&i| self.windows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            end_dates: idx.iter().map(|&i| self.end_dates[i]).collect(),
        }
    }
}

/// Window `k` covers rows `[k, k + len)` and is labeled with `y[k + len - 1]`.
pub fn windows_from_matrix<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    dates: &[NaiveDate],
    len: usize,
) -> Result<WindowSet<T>> {
    let n = x.nrows();
    if y.len() != n || dates.len() != n {
        return Err(Error::dim(n, y.len().min(dates.len())));
    }
    if len == 0 || n < len {
        return Err(Error::config(format!("window length {len} needs at least that many rows, got {n}")));
    }
    let count = n - len + 1;
    Ok(WindowSet {
        windows: (0..count).map(|k| x.slice_axis(Axis(0), (k..k + len).into()).to_owned()).collect(),
        labels: (0..count).map(|k| y[k + len - 1]).collect(),
        end_dates: (0..count).map(|k| dates[k + len - 1]).collect(),
    })
}

pub fn make_windows<T: Scalar>(ds: &Dataset<T>, len: usize) -> Result<WindowSet<T>> {
    let x = ds.feature_matrix()?;
    windows_from_matrix(x.view(), ds.require_target()?, ds.dates(), len)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepCache<T> {
    pub input: Vec<T>,
    pub i: Vec<T>,
    pub f: Vec<T>,
    pub o: Vec<T>,
    pub g: Vec<T>,
    pub c: Vec<T>,
    pub h: Vec<T>,
}

/// Per-step activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCache<T> {
    pub steps: Vec<StepCache<T>>,
}

fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

fn matvec_add<T: Scalar>(out: &mut [T], m: &[T], v: &[T]) {
    let cols = v.len();
    for (r, o) in out.iter_mut().enumerate() {
        *o += m[r * cols..(r + 1) * cols].iter().zip(v).map(|(&a, &b)| a * b).sum::<T>();
    }
}

pub fn lstm_forward<T: Scalar>(p: &LstmParams<T>, window: ArrayView2<'_, T>) -> Result<(T, LstmCache<T>)> {
    if window.ncols() != p.features {
        return Err(Error::dim(p.features, window.ncols()));
    }
    if window.nrows() == 0 {
        return Err(Error::Empty("lstm window"));
    }
    let h = p.hidden;
    let mut h_prev = vec![T::zero(); h];
    let mut c_prev = vec![T::zero(); h];
    let mut steps = Vec::with_capacity(window.nrows());
    for row in window.rows() {
        let input = row.to_vec();
        let mut z = p.b().to_vec();
        matvec_add(&mut z, p.w(), &input);
        matvec_add(&mut z, p.u(), &h_prev);
        let i: Vec<T> = z[..h].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<T> = z[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
        let o: Vec<T> = z[2 * h..3 * h].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<T> = z[3 * h..].iter().map(|&v| v.tanh()).collect();
        let c: Vec<T> = (0..h).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
        let hs: Vec<T> = (0..h).map(|k| o[k] * c[k].tanh()).collect();
        h_prev.clone_from(&hs);
        c_prev.clone_from(&c);
        steps.push(StepCache { input, i, f, o, g, c, h: hs });
    }
    let pred = p.head().iter().zip(&h_prev).fold(p.output_bias(), |acc, (&w, &v)| acc + w * v);
    Ok((pred, LstmCache { steps }))
}

/// Adds `scale * dLoss/dparams` for one window into `grad`.
fn backward<T: Scalar>(p: &LstmParams<T>, cache: &LstmCache<T>, dpred: T, grad: &mut [T]) {
    let (h, f) = (p.hidden, p.features);
    let (ou, ob, ohead, oout) = p.offsets();
    let last = &cache.steps[cache.steps.len() - 1].h;
    for k in 0..h {
        grad[ohead + k] += dpred * last[k];
    }
    grad[oout] += dpred;
    let mut dh: Vec<T> = p.head().iter().map(|&w| dpred * w).collect();
    let mut dc = vec![T::zero(); h];
    let zeros = vec![T::zero(); h];
    let mut dz = vec![T::zero(); 4 * h];
    for t in (0..cache.steps.len()).rev() {
        let s = &cache.steps[t];
        let (h_prev, c_prev) = if t > 0 { (&cache.steps[t - 1].h, &cache.steps[t - 1].c) } else { (&zeros, &zeros) };
        for k in 0..h {
            let tc = s.c[k].tanh();
            let d_o = dh[k] * tc;
            dc[k] += dh[k] * s.o[k] * (T::one() - tc * tc);
            let di = dc[k] * s.g[k];
            let dg = dc[k] * s.i[k];
            let df = dc[k] * c_prev[k];
            dz[k] = di * s.i[k] * (T::one() - s.i[k]);
            dz[h + k] = df * s.f[k] * (T::one() - s.f[k]);
            dz[2 * h + k] = d_o * s.o[k] * (T::one() - s.o[k]);
            dz[3 * h + k] = dg * (T::one() - s.g[k] * s.g[k]);
            dc[k] *= s.f[k];
        }
        for r in 0..4 * h {
            let d = dz[r];
            for (gw, &x) in grad[r * f..(r + 1) * f].iter_mut().zip(&s.input) {
                *gw += d * x;
            }
            for (gu, &hp) in grad[ou + r * h..ou + (r + 1) * h].iter_mut().zip(h_prev) {
                *gu += d * hp;
            }
            grad[ob + r] += d;
        }
        let u = p.u();
        for (k, dhk) in dh.iter_mut().enumerate() {
            *dhk = (0..4 * h).map(|r| u[r * h + k] * dz[r]).sum();
        }
    }
}

/// Mean squared loss over the batch and its exact gradient.
pub fn loss_and_gradients<T: Scalar>(p: &LstmParams<T>, batch: &WindowSet<T>) -> Result<(T, LstmParams<T>)> {
    if batch.is_empty() {
        return Err(Error::Empty("lstm batch"));
    }
    let n = T::from_count(batch.len());
    let mut grad = LstmParams::zeros(p.hidden, p.features);
    let mut loss = T::zero();
    for (w, &y) in batch.windows.iter().zip(&batch.labels) {
        let (pred, cache) = lstm_forward(p, w.view())?;
        let r = pred - y;
        loss += r * r;
        backward(p, &cache, T::lit(2.0) * r / n, &mut grad.data);
    }
    Ok((loss / n, grad))
}

pub fn batch_loss<T: Scalar>(p: &LstmParams<T>, batch: &WindowSet<T>) -> Result<T> {
    let preds = predict_windows(p, batch)?;
    let n = T::from_count(batch.len().max(1));
    Ok(preds.iter().zip(&batch.labels).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() / n)
}

pub fn predict_windows<T: Scalar>(p: &LstmParams<T>, set: &WindowSet<T>) -> Result<Vec<T>> {
    set.windows.iter().map(|w| lstm_forward(p, w.view()).map(|r| r.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmFit<T> {
    pub params: LstmParams<T>,
    /// Full-batch loss before each epoch's update.
    pub loss_trace: Vec<T>,
}

pub fn train_lstm<T: Scalar>(train: &WindowSet<T>, cfg: &LstmConfig) -> Result<LstmFit<T>> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("lstm training windows"));
    }
    let features = train.windows[0].ncols();
    let mut p = LstmParams::init(cfg.hidden_size, features, cfg.seed);
    let n = p.data.len();
    let (mut m, mut v) = (vec![T::zero(); n], vec![T::zero(); n]);
    let (b1, b2, eps, lr) = (T::lit(BETA1), T::lit(BETA2), T::lit(ADAM_EPS), T::lit(cfg.step_size));
    let clip = T::lit(cfg.gradient_clip_norm);
    let mut trace = Vec::with_capacity(cfg.epochs);
    let (mut b1t, mut b2t) = (T::one(), T::one());
    for epoch in 0..cfg.epochs {
        let (loss, grad) = loss_and_gradients(&p, train)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { model: "lstm", detail: format!("non-finite loss at epoch {epoch}") });
        }
        trace.push(loss);
        let norm = grad.data.iter().map(|&g| g * g).sum::<T>().sqrt();
        let factor = if norm > clip { clip / norm } else { T::one() };
        b1t *= b1;
        b2t *= b2;
        for k in 0..n {
            let g = grad.data[k] * factor;
            m[k] = b1 * m[k] + (T::one() - b1) * g;
            v[k] = b2 * v[k] + (T::one() - b2) * g * g;
            let mh = m[k] / (T::one() - b1t);
            let vh = v[k] / (T::one() - b2t);
            p.data[k] -= lr * mh / (vh.sqrt() + eps);
        }
    }
    if !p.is_finite() {
        return Err(Error::Divergence { model: "lstm", detail: "non-finite parameters".into() });
    }
    Ok(LstmFit { params: p, loss_trace: trace })
}

/// Max relative error between analytic and central-difference gradients.
pub fn finite_diff_check<T: Scalar>(p: &LstmParams<T>, sample: &WindowSet<T>, h: T) -> Result<T> {
    let (_, grad) = loss_and_gradients(p, sample)?;
    let mut probe = p.clone();
    let mut worst = T::zero();
    let floor = T::lit(1e-12);
    for k in 0..p.data.len() {
        let orig = p.data[k];
        probe.data[k] = orig + h;
        let up = batch_loss(&probe, sample)?;
        probe.data[k] = orig - h;
        let down = batch_loss(&probe, sample)?;
        probe.data[k] = orig;
        let numeric = (up - down) / (h + h);
        let analytic = grad.data[k];
        let denom = analytic.abs().max(numeric.abs()).max(floor);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn random_set(seed: u64, n: usize, len: usize, f: usize) -> WindowSet<f64> {
        let mut rng = crate::seed::rng_from(seed);
        let d0 = NaiveDate::from_ymd_opt(2021, 1, 31).unwrap();
        WindowSet {
            windows: (0..n).map(|_| Array2::from_shape_fn((len, f), |_| rng.random::<f64>() * 2.0 - 1.0)).collect(),
            labels: (0..n).map(|_| rng.random::<f64>()).collect(),
            end_dates: vec![d0; n],
        }
    }

    #[test]
    fn zero_params_predict_output_bias() {
        let mut p = LstmParams::<f64>::zeros(3, 2);
        p.set_output_bias(1.7);
        let w = Array2::from_elem((4, 2), 0.9);
        let (pred, cache) = lstm_forward(&p, w.view()).unwrap();
        assert_eq!(pred, 1.7);
        for s in &cache.steps {
            assert!(s.i.iter().chain(&s.f).chain(&s.o).all(|&v| v == 0.5));
            assert!(s.c.iter().chain(&s.h).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn states_are_bounded() {
        let set = random_set(1, 5, 6, 3);
        for seed in 0..5 {
            let mut p = LstmParams::<f64>::init(4, 3, seed);
            p.as_mut_slice().iter_mut().for_each(|v| *v *= 8.0);
            for w in &set.windows {
                let (_, cache) = lstm_forward(&p, w.view()).unwrap();
                let mut c_prev = vec![0.0f64; 4];
                for s in &cache.steps {
                    assert!(s.h.iter().all(|v| v.abs() < 1.0));
                    for k in 0..4 {
                        assert!(s.c[k].abs() <= c_prev[k].abs() + 1.0);
                    }
                    c_prev.clone_from(&s.c);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let set = random_set(2, 3, 5, 3);
        let p = LstmParams::<f64>::init(4, 3, 9);
        let err = finite_diff_check(&p, &set, 1e-5).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
        let coarse = finite_diff_check(&p, &set, 1e-2).unwrap();
        assert!(coarse > err);
    }

    #[test]
    fn batch_gradient_is_mean_of_singletons() {
        let set = random_set(3, 2, 4, 2);
        let p = LstmParams::<f64>::init(3, 2, 1);
        let (_, both) = loss_and_gradients(&p, &set).unwrap();
        let (_, a) = loss_and_gradients(&p, &set.subset(&[0])).unwrap();
        let (_, b) = loss_and_gradients(&p, &set.subset(&[1])).unwrap();
        for k in 0..both.as_slice().len() {
            assert!((both.as_slice()[k] - 0.5 * (a.as_slice()[k] + b.as_slice()[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        let mut set = random_set(4, 3, 3, 2);
        let mut p = LstmParams::<f64>::zeros(2, 2);
        p.set_output_bias(0.4);
        set.labels = vec![0.4; 3];
        let (loss, grad) = loss_and_gradients(&p, &set).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.as_slice().iter().all(|&g| g == 0.0));
        assert!(finite_diff_check(&p, &set, 1e-5).unwrap() < 1e-8);
    }

    #[test]
    fn constant_target_is_learned() {
        let mut set = random_set(5, 10, 3, 2);
        set.labels = vec![4.0; 10];
        let cfg = LstmConfig { window_length: 3, hidden_size: 4, epochs: 2000, ..LstmConfig::default() };
        let fit = train_lstm(&set, &cfg).unwrap();
        assert!(batch_loss(&fit.params, &set).unwrap() < 1e-3);
        assert_eq!(fit, train_lstm(&set, &cfg).unwrap());
    }

    #[test]
    fn windows_from_rows() {
        let x = Array2::from_shape_fn((48, 2), |(i, j)| (i * 2 + j) as f64);
        let y: Vec<f64> = (0..48).map(f64::from).collect();
        let dates: Vec<NaiveDate> = (0..48).map(|k| NaiveDate::from_ymd_opt(2021, 1, 1).unwrap() + chrono::Days::new(k)).collect();
        let set = windows_from_matrix(x.view(), &y, &dates, 6).unwrap();
        assert_eq!(set.len(), 43);
        assert_eq!(set.labels[0], 5.0);
        assert_eq!(set.windows[0].slice(ndarray::s![1.., ..]), set.windows[1].slice(ndarray::s![..5, ..]));
        assert_eq!(windows_from_matrix(x.view(), &y, &dates, 1).unwrap().len(), 48);
        assert!(windows_from_matrix(x.view(), &y, &dates, 49).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let p = LstmParams::<f64>::init(3, 2, 7);
        let back = LstmParams::<f64>::from_checkpoint(&p.to_checkpoint()).unwrap();
        assert_eq!(p, back);
        assert!(LstmParams::<f64>::from_checkpoint("lstm hidden=3 features=2\n1.0\n").is_err());
    }
}
