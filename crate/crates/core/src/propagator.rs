//! Exact linear evolution `e^{itΔ}` on an `N×N` periodic box.
//!
//! The box is a power-of-two torus `(Z/NZ)²`; site `l` lives at array index
//! `(origin + l) mod N`. Evolution multiplies the discrete Fourier transform
//! by `e^{-itg(2πj/N)}`, so on the torus it is exactly unitary. Wrap-around
//! only matters for the infinite-lattice interpretation, which is why
//! [`min_box_size`] keeps the light cone well inside the box.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlannerScalar};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symbols::DispersionSymbol;

/// Anti-aliasing margin, in lattice sites, added to the light-cone radius.
pub const BOX_MARGIN: f64 = 64.0;

const WAVEFIELD_MAGIC: &[u8; 8] = b"HEXLATWF";

/// Smallest power of two `N ≥ 2((4√2 + 1)|t| + 64)`.
pub fn min_box_size(t: f64) -> usize {
    let speed = 4.0 * std::f64::consts::SQRT_2 + 1.0;
    let needed = 2.0 * (speed * t.abs() + BOX_MARGIN);
    (needed.ceil() as usize).next_power_of_two()
}

fn check_side(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Complex amplitudes on an `N×N` periodic box.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField<T> {
    n: usize,
    origin: [usize; 2],
    data: Vec<Complex<T>>,
}

impl<T: Real> WaveField<T> {
    pub fn zeros(n: usize) -> Result<Self> {
        check_side(n)?;
        Ok(Self {
            n,
            origin: [0, 0],
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        })
    }

    /// `amplitude · δ₀`.
    pub fn delta(n: usize, amplitude: Complex<T>) -> Result<Self> {
        let mut f = Self::zeros(n)?;
        f.set([0, 0], amplitude);
        Ok(f)
    }

    /// Field with `u(l) = f(l)` for every site `l ∈ [-N/2, N/2)²`.
    pub fn from_fn(n: usize, mut f: impl FnMut([i64; 2]) -> Complex<T>) -> Result<Self> {
        let mut out = Self::zeros(n)?;
        for idx in 0..n * n {
            let l = out.site_of(idx);
            out.data[idx] = f(l);
        }
        Ok(out)
    }

    /// Wraps row-major data; `data.len()` must be `n²`.
    pub fn from_data(n: usize, origin: [usize; 2], data: Vec<Complex<T>>) -> Result<Self> {
        check_side(n)?;
        if data.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} amplitudes, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self {
            n,
            origin: [origin[0] % n, origin[1] % n],
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> [usize; 2] {
        self.origin
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    /// Array index of lattice site `l` (indices are residues mod `N`).
    pub fn index_of(&self, l: [i64; 2]) -> usize {
        let n = self.n as i64;
        let i = (self.origin[0] as i64 + l[0]).rem_euclid(n) as usize;
        let j = (self.origin[1] as i64 + l[1]).rem_euclid(n) as usize;
        i * self.n + j
    }

    /// Representative of the site stored at `idx`, in `[-N/2, N/2)²`.
    pub fn site_of(&self, idx: usize) -> [i64; 2] {
        let n = self.n as i64;
        let half = n / 2;
        let i = (idx / self.n) as i64 - self.origin[0] as i64;
        let j = (idx % self.n) as i64 - self.origin[1] as i64;
        [
            (i + half).rem_euclid(n) - half,
            (j + half).rem_euclid(n) - half,
        ]
    }

    pub fn get(&self, l: [i64; 2]) -> Complex<T> {
        self.data[self.index_of(l)]
    }

    pub fn set(&mut self, l: [i64; 2], value: Complex<T>) {
        let idx = self.index_of(l);
        self.data[idx] = value;
    }

    /// `Σ|u|²`.
    /// Blocked summation keeps the rounding error flat in the box size.
    pub fn mass(&self) -> T {
        self.data
            .chunks(1024)
            .map(|c| c.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()))
            .fold(T::zero(), |acc, s| acc + s)
    }

    pub fn norm_l2(&self) -> T {
        self.mass().sqrt()
    }

    pub fn sup_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// `ℓʳ` norm for `r ≥ 1`; `r = ∞` gives the sup norm.
    pub fn norm_lr(&self, r: f64) -> T {
        if r.is_infinite() {
            return self.sup_norm();
        }
        if r == 2.0 {
            return self.norm_l2();
        }
        // Scale by the sup norm so large r does not underflow.
        let m = self.sup_norm();
        if m == T::zero() {
            return T::zero();
        }
        let rr = T::lit(r);
        let s = self
            .data
            .iter()
            .fold(T::zero(), |acc, z| acc + (z.norm() / m).powf(rr));
        m * s.powf(T::one() / rr)
    }

    /// `ℓ²` distance to a field on the same box.
    pub fn l2_distance(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n, "box sizes differ");
        let sum = if self.origin == other.origin {
            self.data
                .iter()
                .zip(&other.data)
                .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
        } else {
            (0..self.data.len()).fold(T::zero(), |acc, idx| {
                let l = self.site_of(idx);
                acc + (self.data[idx] - other.get(l)).norm_sqr()
            })
        };
        sum.sqrt()
    }

    pub fn scale(&mut self, c: Complex<T>) {
        self.data.iter_mut().for_each(|z| *z = *z * c);
    }

    /// Copy embedded in a larger box, centred on the same origin site.
    pub fn embed(&self, n: usize) -> Result<Self> {
        check_side(n)?;
        if n < self.n {
            return Err(Error::InvalidInput(format!(
                "cannot embed a {}-box into a {n}-box",
                self.n
            )));
        }
        let mut out = Self::zeros(n)?;
        for idx in 0..self.data.len() {
            let l = self.site_of(idx);
            out.set(l, self.data[idx]);
        }
        Ok(out)
    }

    /// CSV snapshot with columns `l1,l2,re,im`, sites in lexicographic order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "l1,l2,re,im")?;
        let half = (self.n / 2) as i64;
        for l1 in -half..half {
            for l2 in -half..half {
                let z = self.get([l1, l2]);
                writeln!(w, "{l1},{l2},{:.16e},{:.16e}", z.re.as_f64(), z.im.as_f64())?;
            }
        }
        Ok(())
    }

    /// Binary dump: 8-byte magic, `N` as little-endian `u64`, then the
    /// row-major amplitudes as little-endian `f64` pairs. The origin is
    /// normalised to index `(0, 0)`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(WAVEFIELD_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let z = self.data[((i + self.origin[0]) % n) * n + (j + self.origin[1]) % n];
                w.write_all(&z.re.as_f64().to_le_bytes())?;
                w.write_all(&z.im.as_f64().to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..8] != WAVEFIELD_MAGIC {
            return Err(Error::InvalidInput("bad wave-field magic".into()));
        }
        let n = u64::from_le_bytes(header[8..].try_into().expect("8 bytes")) as usize;
        check_side(n)?;
        let mut data = Vec::with_capacity(n * n);
        let mut buf = [0u8; 16];
        for _ in 0..n * n {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
            data.push(Complex::new(T::lit(re), T::lit(im)));
        }
        Self::from_data(n, [0, 0], data)
    }
}

/// Square 2-D FFT on row-major data. The forward pass leaves the spectrum
/// transposed (`[k1][k0]`); the inverse pass expects that layout.
struct Fft2<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft2<T> {
    fn new(n: usize) -> Self {
        // The SIMD kernels carry a small systematic gain per roundtrip that
        // shows up as norm drift over long runs; the scalar ones do not.
        let mut planner = FftPlannerScalar::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn rows(&self, fft: &Arc<dyn Fft<T>>, data: &mut [Complex<T>]) {
        let scratch_len = fft.get_inplace_scratch_len();
        data.par_chunks_mut(self.n).for_each_init(
            || vec![Complex::new(T::zero(), T::zero()); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    }

    fn forward_transposed(&self, data: &mut [Complex<T>]) {
        self.rows(&self.forward, data);
        transpose_in_place(data, self.n);
        self.rows(&self.forward, data);
    }

    fn inverse_from_transposed(&self, data: &mut [Complex<T>]) {
        self.rows(&self.inverse, data);
        transpose_in_place(data, self.n);
        self.rows(&self.inverse, data);
    }
}

fn transpose_in_place<T: Copy>(data: &mut [T], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Cached propagator `e^{itΔ}` for a fixed symbol, box side and time step.
pub struct LinearPropagator<T: Real> {
    symbol: DispersionSymbol,
    t: T,
    fft: Fft2<T>,
    /// `e^{-itg}/N²` in transposed layout.
    multiplier: Vec<Complex<T>>,
}

impl<T: Real> LinearPropagator<T> {
    pub fn new(symbol: DispersionSymbol, n: usize, t: T) -> Result<Self> {
        check_side(n)?;
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("time {t} is not finite")));
        }
        let norm = T::one() / T::lit((n * n) as f64);
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        let nn = T::lit(n as f64);
        let mut multiplier = vec![Complex::new(T::zero(), T::zero()); n * n];
        multiplier
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(k1, row)| {
                let x1 = two_pi * T::lit(k1 as f64) / nn;
                for (k0, m) in row.iter_mut().enumerate() {
                    let x0 = two_pi * T::lit(k0 as f64) / nn;
                    let (s, c) = (t * symbol.eval([x0, x1])).sin_cos();
                    *m = Complex::new(c * norm, -s * norm);
                }
            });
        Ok(Self {
            symbol,
            t,
            fft: Fft2::new(n),
            multiplier,
        })
    }

    pub fn n(&self) -> usize {
        self.fft.n
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn symbol(&self) -> DispersionSymbol {
        self.symbol
    }

    /// Evolves `field` in place by the cached time step.
    pub fn apply(&self, field: &mut WaveField<T>) {
        assert_eq!(field.n, self.fft.n, "box side mismatch");
        // The multiplier is translation invariant, so the origin is irrelevant.
        let data = field.data_mut();
        self.fft.forward_transposed(data);
        data.par_iter_mut()
            .zip(self.multiplier.par_iter())
            .for_each(|(z, m)| *z = *z * m);
        self.fft.inverse_from_transposed(data);
    }
}

/// `inverse-DFT(e^{-itg(2πj/N)} · DFT(field))`.
pub fn propagate_linear<T: Real>(
    field: &WaveField<T>,
    symbol: DispersionSymbol,
    t: T,
) -> Result<WaveField<T>> {
    let prop = LinearPropagator::new(symbol, field.n(), t)?;
    let mut out = field.clone();
    prop.apply(&mut out);
    Ok(out)
}

/// Kernel `K(l, t) = (2π)^{-2} ∫ e^{-itg(x) + i⟨l,x⟩} dx` sampled on a box.
#[derive(Clone, Debug)]
pub struct KernelGrid<T> {
    pub t: T,
    field: WaveField<T>,
}

impl<T: Real> KernelGrid<T> {
    pub fn n(&self) -> usize {
        self.field.n()
    }

    /// Largest `|l|∞` covered by the grid.
    pub fn radius(&self) -> i64 {
        self.field.n() as i64 / 2 - 1
    }

    /// `K(l, t)` for `|l|∞ ≤ N/2 - 1`.
    pub fn get(&self, l: [i64; 2]) -> Option<Complex<T>> {
        let r = self.radius();
        (l[0].abs() <= r && l[1].abs() <= r).then(|| self.field.get(l))
    }

    pub fn iter(&self) -> impl Iterator<Item = ([i64; 2], Complex<T>)> + '_ {
        let r = self.radius();
        (-r..=r).flat_map(move |l1| (-r..=r).map(move |l2| ([l1, l2], self.field.get([l1, l2]))))
    }

    /// `max_l |K(l,t)|` with the first maximising site in storage order.
    pub fn sup(&self) -> (T, [i64; 2]) {
        let r = self.radius();
        let mut best = (T::zero(), [0, 0]);
        for (idx, z) in self.field.data().iter().enumerate() {
            let l = self.field.site_of(idx);
            if l[0].abs() > r || l[1].abs() > r {
                continue;
            }
            let a = z.norm();
            if a > best.0 {
                best = (a, l);
            }
        }
        best
    }

    pub fn field(&self) -> &WaveField<T> {
        &self.field
    }

    pub fn into_field(self) -> WaveField<T> {
        self.field
    }
}

/// Kernel of `e^{itΔ}` on an `n×n` box, obtained by evolving `δ₀`.
pub fn kernel_fft<T: Real>(symbol: DispersionSymbol, n: usize, t: T) -> Result<KernelGrid<T>> {
    check_side(n)?;
    let min = min_box_size(t.as_f64());
    if n < min {
        return Err(Error::BoxTooSmall {
            n,
            min,
            t: t.as_f64(),
        });
    }
    let mut field = WaveField::delta(n, Complex::new(T::one(), T::zero()))?;
    if t != T::zero() {
        LinearPropagator::new(symbol, n, t)?.apply(&mut field);
    }
    Ok(KernelGrid { t, field })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn random_field(n: usize, seed: u64) -> WaveField<f64> {
        // Small LCG; the property tests only need arbitrary data.
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        WaveField::from_fn(n, |_| Complex::new(next(), next())).unwrap()
    }

    #[test]
    fn box_sizes() {
        assert_eq!(min_box_size(0.0), 128);
        assert_eq!(min_box_size(100.0), 2048);
        assert_eq!(min_box_size(200.0), 4096);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(WaveField::<f64>::zeros(100), Err(Error::NotPowerOfTwo(100))));
    }

    #[test]
    fn zero_time_is_identity() {
        let f = random_field(32, 3);
        let g = propagate_linear(&f, DispersionSymbol::HEX, 0.0).unwrap();
        assert!(f.l2_distance(&g) < 1e-14);
    }

    #[test]
    fn kernel_at_zero_time_is_delta() {
        let k = kernel_fft(DispersionSymbol::HEX, 128, 0.0).unwrap();
        for (l, z) in k.iter() {
            let expect = if l == [0, 0] { 1.0 } else { 0.0 };
            assert_eq!(z, Complex::new(expect, 0.0));
        }
    }

    #[test]
    fn kernel_is_normalised() {
        let k = kernel_fft(DispersionSymbol::HEX, min_box_size(10.0), 10.0).unwrap();
        let total: f64 = k.iter().map(|(_, z)| z.norm_sqr()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn kernel_refuses_small_box() {
        let err = kernel_fft::<f64>(DispersionSymbol::HEX, 128, 10.0).unwrap_err();
        assert!(matches!(err, Error::BoxTooSmall { n: 128, min: 512, .. }));
    }

    #[test]
    fn kernel_outside_light_cone_is_negligible() {
        let t = 100.0;
        let k = kernel_fft(DispersionSymbol::HEX, min_box_size(t), t).unwrap();
        let cone = (4.0 * std::f64::consts::SQRT_2 + 1.0) * t;
        let worst = k
            .iter()
            .filter(|(l, _)| ((l[0] * l[0] + l[1] * l[1]) as f64).sqrt() > cone)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn delta_mass_is_preserved() {
        let f = WaveField::delta(256, Complex::new(1.0, 0.0)).unwrap();
        let g = propagate_linear(&f, DispersionSymbol::HEX, 7.3).unwrap();
        assert_abs_diff_eq!(g.mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn site_index_roundtrip() {
        let f = WaveField::<f64>::from_data(16, [3, 5], vec![Complex::new(0.0, 0.0); 256]).unwrap();
        for idx in 0..256 {
            assert_eq!(f.index_of(f.site_of(idx)), idx);
        }
        assert_eq!(f.index_of([0, 0]), 3 * 16 + 5);
    }

    #[test]
    fn translation_commutes_with_evolution() {
        let mut shifted = WaveField::<f64>::zeros(64).unwrap();
        shifted.set([5, -7], Complex::new(1.0, 0.0));
        let out = propagate_linear(&shifted, DispersionSymbol::HEX, 2.0).unwrap();
        let k = kernel_fft(DispersionSymbol::HEX, 256, 2.0).unwrap();
        for l in [[0, 0], [3, 1], [-4, 2]] {
            let a = out.get([l[0] + 5, l[1] - 7]);
            let b = k.get(l).unwrap();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn lr_norms() {
        let mut f = WaveField::<f64>::zeros(8).unwrap();
        f.set([0, 0], Complex::new(3.0, 0.0));
        f.set([1, 0], Complex::new(0.0, 4.0));
        assert_abs_diff_eq!(f.norm_lr(2.0), 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.norm_lr(1.0), 7.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.norm_lr(f64::INFINITY), 4.0);
        assert_abs_diff_eq!(f.norm_lr(4.0), (81.0f64 + 256.0).powf(0.25), epsilon = 1e-13);
    }

    #[test]
    fn binary_roundtrip_and_header() {
        let f = random_field(8, 11);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"HEXLATWF");
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 8);
        assert_eq!(buf.len(), 16 + 64 * 16);
        let g = WaveField::<f64>::read_binary(&buf[..]).unwrap();
        assert_eq!(f, g);
        assert!(WaveField::<f64>::read_binary(&b"NOTMAGIC\0\0\0\0\0\0\0\0"[..]).is_err());
    }

    #[test]
    fn csv_snapshot_layout() {
        let mut f = WaveField::<f64>::zeros(2).unwrap();
        f.set([-1, 0], Complex::new(0.5, -0.25));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "l1,l2,re,im");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "-1,0,5.0000000000000000e-1,-2.5000000000000000e-1");
    }

    #[test]
    fn embedding_keeps_sites() {
        let f = random_field(16, 5);
        let g = f.embed(64).unwrap();
        for idx in 0..256 {
            let l = f.site_of(idx);
            assert_eq!(g.get(l), f.data()[idx]);
        }
        assert_abs_diff_eq!(g.mass(), f.mass(), epsilon = 1e-12);
    }

    #[test]
    fn single_precision_is_unitary() {
        let f = WaveField::<f32>::delta(64, Complex::new(1.0, 0.0)).unwrap();
        let g = propagate_linear(&f, DispersionSymbol::HEX, 3.0f32).unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unitarity(seed in any::<u64>(), t in 0.0f64..100.0) {
            let f = random_field(32, seed);
            let g = propagate_linear(&f, DispersionSymbol::HEX, t).unwrap();
            prop_assert!((g.norm_l2() - f.norm_l2()).abs() <= 1e-12 * f.norm_l2());
        }

        #[test]
        fn group_law(seed in any::<u64>(), t1 in -50.0f64..50.0, t2 in -50.0f64..50.0) {
            let f = random_field(32, seed);
            let sym = DispersionSymbol::HEX;
            let a = propagate_linear(&propagate_linear(&f, sym, t1).unwrap(), sym, t2).unwrap();
            let b = propagate_linear(&f, sym, t1 + t2).unwrap();
            prop_assert!(a.l2_distance(&b) < 1e-11);
        }

        #[test]
        fn time_reversal(seed in any::<u64>(), t in 0.0f64..100.0) {
            let f = random_field(32, seed);
            let sym = DispersionSymbol::SQUARE;
            let back = propagate_linear(&propagate_linear(&f, sym, t).unwrap(), sym, -t).unwrap();
            prop_assert!(back.l2_distance(&f) < 1e-11);
        }
    }
}
