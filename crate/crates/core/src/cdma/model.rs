//! Chip-rate received-vector model for the synchronous downlink.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::SpreadingCode;
use crate::{CVector, Error, Result};

/// `M x L` matrix whose column `j` is the spreading code delayed by `j`
/// chips, with `M = N + L - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionMatrix {
    entries: DMatrix<f64>,
    processing_gain: usize,
}

impl ConvolutionMatrix {
    pub fn new(code: &SpreadingCode, taps: usize) -> Result<Self> {
        if taps == 0 {
            return Err(Error::Dimension("convolution matrix needs at least one tap".into()));
        }
        let n = code.len();
        let m = n + taps - 1;
        let mut entries = DMatrix::zeros(m, taps);
        for j in 0..taps {
            for (i, &c) in code.chips.iter().enumerate() {
                entries[(i + j, j)] = c;
            }
        }
        Ok(Self { entries, processing_gain: n })
    }

    /// Observation length `M`.
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of channel taps `L`.
    pub fn taps(&self) -> usize {
        self.entries.ncols()
    }

    pub fn processing_gain(&self) -> usize {
        self.processing_gain
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `C h`.
    pub fn apply(&self, h: &CVector) -> CVector {
        let (m, l) = self.entries.shape();
        CVector::from_fn(m, |i, _| (0..l).map(|j| h[j] * self.entries[(i, j)]).sum())
    }

    /// `C^H v`; the chips are real so this is `C^T v`.
    pub fn adjoint_apply(&self, v: &CVector) -> CVector {
        let (m, l) = self.entries.shape();
        CVector::from_fn(l, |j, _| (0..m).map(|i| v[i] * self.entries[(i, j)]).sum())
    }

    /// `C^H C`, real symmetric `L x L`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.entries.transpose() * &self.entries
    }

    /// Rescale every chip by `c`. Used by analysis scaling checks.
    pub fn scaled(&self, c: f64) -> Self {
        Self { entries: &self.entries * c, processing_gain: self.processing_gain }
    }
}

/// Symbols of all users for the previous, current and next symbol interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolWindow {
    pub previous: Vec<Complex64>,
    pub current: Vec<Complex64>,
    pub next: Vec<Complex64>,
}

impl SymbolWindow {
    pub fn users(&self) -> usize {
        self.current.len()
    }
}

/// One received vector together with its genie decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolRecord {
    pub received: CVector,
    pub symbols: Vec<Complex64>,
    pub amplitudes: Vec<f64>,
    /// Chip-spaced channel impulse response in force during the symbol.
    pub channel_snapshot: CVector,
    pub desired_user: usize,
    /// `A_d b_d C_d h`.
    pub desired_component: CVector,
    /// MAI plus the ISI of every user.
    pub interference_component: CVector,
    pub noise_component: CVector,
}

/// Effective signatures `C_j h` of every user and the parts of them that
/// leak into the neighbouring symbol windows.
#[derive(Debug, Clone)]
pub struct SignalGeometry {
    pub effective: Vec<CVector>,
    /// Tail of the previous symbol's response landing in chips `0..L-1`.
    pub isi_previous: Vec<CVector>,
    /// Head of the next symbol's response landing in chips `N..M`.
    pub isi_next: Vec<CVector>,
    pub channel: CVector,
}

impl SignalGeometry {
    pub fn new(convs: &[ConvolutionMatrix], h: &CVector) -> Result<Self> {
        let first = convs.first().ok_or_else(|| Error::Dimension("no users".into()))?;
        let (n, l, m) = (first.processing_gain(), first.taps(), first.rows());
        if l > n {
            return Err(Error::Dimension(format!("{l} taps exceed the {n}-chip symbol")));
        }
        if h.len() != l {
            return Err(Error::Dimension(format!("channel has {} taps, matrices {l}", h.len())));
        }
        if convs.iter().any(|c| c.taps() != l || c.rows() != m) {
            return Err(Error::Dimension("convolution matrices differ in shape".into()));
        }
        let effective: Vec<CVector> = convs.iter().map(|c| c.apply(h)).collect();
        let isi_previous = effective
            .iter()
            .map(|s| CVector::from_fn(m, |i, _| if i + n < m { s[i + n] } else { Complex64::default() }))
            .collect();
        let isi_next = effective
            .iter()
            .map(|s| CVector::from_fn(m, |i, _| if i >= n { s[i - n] } else { Complex64::default() }))
            .collect();
        Ok(Self { effective, isi_previous, isi_next, channel: h.clone() })
    }

    pub fn users(&self) -> usize {
        self.effective.len()
    }

    /// Observation length `M`.
    pub fn rows(&self) -> usize {
        self.effective[0].len()
    }

    /// Received vector for one symbol interval, with its components.
    pub fn synthesize<R: Rng + ?Sized>(
        &self,
        amplitudes: &[f64],
        window: &SymbolWindow,
        noise_sigma2: f64,
        desired_user: usize,
        rng: &mut R,
    ) -> Result<SymbolRecord> {
        let k = self.users();
        if amplitudes.len() != k
            || window.current.len() != k
            || window.previous.len() != k
            || window.next.len() != k
        {
            return Err(Error::Dimension(format!(
                "{k} users but {} amplitudes and symbol windows of {}/{}/{}",
                amplitudes.len(),
                window.previous.len(),
                window.current.len(),
                window.next.len()
            )));
        }
        if desired_user >= k {
            return Err(Error::Dimension(format!("desired user {desired_user} out of {k}")));
        }
        if !(noise_sigma2 >= 0.0) {
            return Err(Error::Config(format!("noise variance {noise_sigma2}")));
        }
        let m = self.rows();
        let mut desired = CVector::zeros(m);
        let mut interference = CVector::zeros(m);
        for j in 0..k {
            let a = amplitudes[j];
            let cur = &self.effective[j] * (window.current[j] * a);
            if j == desired_user {
                desired += cur;
            } else {
                interference += cur;
            }
            interference += &self.isi_previous[j] * (window.previous[j] * a);
            interference += &self.isi_next[j] * (window.next[j] * a);
        }
        let scale = (noise_sigma2 / 2.0).sqrt();
        let noise = CVector::from_fn(m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        });
        let received = &desired + &interference + &noise;
        Ok(SymbolRecord {
            received,
            symbols: window.current.clone(),
            amplitudes: amplitudes.to_vec(),
            channel_snapshot: self.channel.clone(),
            desired_user,
            desired_component: desired,
            interference_component: interference,
            noise_component: noise,
        })
    }

    /// Expected power of the desired term at the output of `v`, averaged
    /// over unit-power symbols: `A_d^2 |v^H C_d h|^2`.
    pub fn desired_power(&self, v: &CVector, amplitudes: &[f64], desired_user: usize) -> f64 {
        amplitudes[desired_user].powi(2) * v.dotc(&self.effective[desired_user]).norm_sqr()
    }

    /// Expected MAI + ISI + noise power at the output of `v` for independent
    /// unit-power symbols, conditioned on the current channel.
    pub fn interference_power(&self, v: &CVector, amplitudes: &[f64], desired_user: usize, noise_sigma2: f64) -> f64 {
        let mut p = noise_sigma2 * v.norm_squared();
        for j in 0..self.users() {
            let a2 = amplitudes[j].powi(2);
            if j != desired_user {
                p += a2 * v.dotc(&self.effective[j]).norm_sqr();
            }
            p += a2 * (v.dotc(&self.isi_previous[j]).norm_sqr() + v.dotc(&self.isi_next[j]).norm_sqr());
        }
        p
    }
}

/// Free-standing form of [`SignalGeometry::synthesize`].
pub fn synthesize_symbol<R: Rng + ?Sized>(
    convs: &[ConvolutionMatrix],
    h: &CVector,
    amplitudes: &[f64],
    window: &SymbolWindow,
    noise_sigma2: f64,
    desired_user: usize,
    rng: &mut R,
) -> Result<SymbolRecord> {
    SignalGeometry::new(convs, h)?.synthesize(amplitudes, window, noise_sigma2, desired_user, rng)
}

/// Noise variance per complex chip for a given Eb/N0, using the energy
/// `N * sum(path powers)` of the desired user's effective signature at unit
/// amplitude.
pub fn noise_variance(processing_gain: usize, channel_power: f64, eb_n0_db: f64) -> f64 {
    processing_gain as f64 * channel_power * 10f64.powf(-eb_n0_db / 10.0)
}

/// A set of users sharing one downlink channel.
#[derive(Debug, Clone)]
pub struct Downlink {
    pub codes: Vec<SpreadingCode>,
    pub convs: Vec<ConvolutionMatrix>,
    pub desired_user: usize,
}

impl Downlink {
    pub fn new(codes: Vec<SpreadingCode>, taps: usize, desired_user: usize) -> Result<Self> {
        if desired_user >= codes.len() {
            return Err(Error::Dimension(format!("desired user {desired_user} of {}", codes.len())));
        }
        let convs = codes.iter().map(|c| ConvolutionMatrix::new(c, taps)).collect::<Result<Vec<_>>>()?;
        Ok(Self { codes, convs, desired_user })
    }

    pub fn users(&self) -> usize {
        self.codes.len()
    }

    pub fn rows(&self) -> usize {
        self.convs[0].rows()
    }

    pub fn taps(&self) -> usize {
        self.convs[0].taps()
    }

    pub fn processing_gain(&self) -> usize {
        self.convs[0].processing_gain()
    }

    pub fn desired_conv(&self) -> &ConvolutionMatrix {
        &self.convs[self.desired_user]
    }

    pub fn geometry(&self, h: &CVector) -> Result<SignalGeometry> {
        SignalGeometry::new(&self.convs, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_chip_layout() {
        let code = SpreadingCode::new(vec![1.0, -1.0], 0).unwrap();
        let cm = ConvolutionMatrix::new(&code, 2).unwrap();
        let expected = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, -1.0, 1.0, 0.0, -1.0]);
        assert_eq!(cm.entries(), &expected);
    }

    #[test]
    fn single_tap_is_the_code() {
        let code = SpreadingCode::new(vec![1.0, -1.0, -1.0, 1.0, 1.0], 0).unwrap();
        let cm = ConvolutionMatrix::new(&code, 1).unwrap();
        assert_eq!(cm.entries().column(0).as_slice(), code.chips.as_slice());
    }

    #[test]
    fn columns_have_norm_n() {
        let codes = super::super::gold_family(5).unwrap();
        for code in codes.iter().take(5) {
            for l in 1..=8 {
                let cm = ConvolutionMatrix::new(code, l).unwrap();
                assert_eq!(cm.rows(), 31 + l - 1);
                for j in 0..l {
                    assert_eq!(cm.entries().column(j).norm_squared(), 31.0);
                }
            }
        }
    }

    #[test]
    fn no_multipath_receives_the_code() {
        let code = super::super::gold_family(5).unwrap().remove(3);
        let conv = vec![ConvolutionMatrix::new(&code, 1).unwrap()];
        let h = CVector::from_element(1, c(1.0));
        let w = SymbolWindow { previous: vec![c(-1.0)], current: vec![c(1.0)], next: vec![c(1.0)] };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rec = synthesize_symbol(&conv, &h, &[1.0], &w, 0.0, 0, &mut rng).unwrap();
        for (r, chip) in rec.received.iter().zip(&code.chips) {
            assert_eq!(*r, c(*chip));
        }
        assert_eq!(rec.interference_component.norm(), 0.0);
    }

    #[test]
    fn isi_vanishes_without_neighbours() {
        let code = super::super::gold_family(5).unwrap().remove(0);
        let conv = vec![ConvolutionMatrix::new(&code, 3).unwrap()];
        let h = CVector::from_vec(vec![c(1.0), Complex64::new(0.3, -0.2), c(0.5)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let busy = SymbolWindow { previous: vec![c(1.0)], current: vec![c(-1.0)], next: vec![c(-1.0)] };
        let rec = synthesize_symbol(&conv, &h, &[1.0], &busy, 0.0, 0, &mut rng).unwrap();
        let isi = &rec.received - &rec.desired_component;
        assert!(isi.norm() > 0.1);
        // ISI only touches the first and last L-1 chips.
        for i in 2..31 {
            assert_eq!(isi[i], Complex64::default());
        }
        let quiet = SymbolWindow { previous: vec![c(0.0)], current: vec![c(-1.0)], next: vec![c(0.0)] };
        let rec = synthesize_symbol(&conv, &h, &[1.0], &quiet, 0.0, 0, &mut rng).unwrap();
        assert_eq!(rec.interference_component.norm(), 0.0);
    }

    #[test]
    fn mismatched_users_is_dimension_error() {
        let codes = super::super::gold_family(5).unwrap();
        let dl = Downlink::new(codes[..3].to_vec(), 2, 0).unwrap();
        let h = CVector::from_element(2, c(0.7));
        let g = dl.geometry(&h).unwrap();
        let w = SymbolWindow { previous: vec![c(1.0); 3], current: vec![c(1.0); 2], next: vec![c(1.0); 3] };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(g.synthesize(&[1.0; 3], &w, 0.1, 0, &mut rng), Err(Error::Dimension(_))));
        assert!(matches!(g.synthesize(&[1.0; 2], &w, 0.1, 0, &mut rng), Err(Error::Dimension(_))));
    }

    #[test]
    fn too_many_taps_rejected() {
        let code = SpreadingCode::new(vec![1.0, -1.0, 1.0], 0).unwrap();
        let conv = vec![ConvolutionMatrix::new(&code, 4).unwrap()];
        assert!(SignalGeometry::new(&conv, &CVector::zeros(4)).is_err());
    }
}
