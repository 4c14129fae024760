//! Closed-form reference solutions.
//!
//! Each reference provides the reduction variables directly so runs can be
//! seeded and checked without finite differencing. Conventions:
//!
//! Cauchy slicing (t; x, y, z): v = (U, P, Q, R) = (psi_t, psi_x, psi_y,
//! psi_z).
//!
//! Null-plane slicing (u = t - z; z, x, y): v = (R, P, Q) = (psi_z, psi_x,
//! psi_y) with derivatives taken at fixed u. The first-derivative set is
//! w = (R_x, R_y, R_z, P_x, Q_x, P_y, Q_y).
//!
//! Null-cone slicing (u = t - r; r, s = cos theta, phi), g = r psi:
//! v = (R, P, Q) = (g_r, g_s lam / r, g_phi / (lam r)) with
//! lam = sqrt(1 - s^2). The first-derivative set is
//! w = (R_s lam/r, R_phi/(r lam), R_r, (P lam)_s / r, P_phi/(r lam),
//! Q_s lam/r, Q_phi/(r lam)); the mixed scaling on w4 is what closes the
//! radial hierarchy.

/// Smooth pulse profile with derivatives up to fourth order.
#[derive(Clone, Copy, Debug)]
pub enum Profile {
    Sine { amp: f64, freq: f64, phase: f64 },
    Gaussian { amp: f64, center: f64, width: f64 },
}

impl Profile {
    pub fn d(&self, x: f64, n: usize) -> f64 {
        match *self {
            Profile::Sine { amp, freq, phase } => {
                let a = amp * freq.powi(n as i32);
                match n % 4 {
                    0 => a * (freq * x + phase).sin(),
                    1 => a * (freq * x + phase).cos(),
                    2 => -a * (freq * x + phase).sin(),
                    _ => -a * (freq * x + phase).cos(),
                }
            }
            Profile::Gaussian { amp, center, width } => {
                let t = (x - center) / width;
                let e = amp * (-t * t).exp();
                let p = match n {
                    0 => 1.0,
                    1 => -2.0 * t,
                    2 => 4.0 * t * t - 2.0,
                    3 => -8.0 * t.powi(3) + 12.0 * t,
                    4 => 16.0 * t.powi(4) - 48.0 * t * t + 12.0,
                    _ => panic!("profile derivative order {n} not supported"),
                };
                e * p / width.powi(n as i32)
            }
        }
    }
}

/// Travelling wave psi = amp sin(k.x - |k| t) on the periodic box.
#[derive(Clone, Copy, Debug)]
pub struct CauchyWave {
    pub k: [f64; 3],
    pub amp: f64,
}

impl CauchyWave {
    pub fn omega(&self) -> f64 {
        (self.k[0] * self.k[0] + self.k[1] * self.k[1] + self.k[2] * self.k[2]).sqrt()
    }

    fn theta(&self, t: f64, x: f64, y: f64, z: f64) -> f64 {
        self.k[0] * x + self.k[1] * y + self.k[2] * z - self.omega() * t
    }

    pub fn psi(&self, t: f64, x: f64, y: f64, z: f64) -> f64 {
        self.amp * self.theta(t, x, y, z).sin()
    }

    /// (U, P, Q, R) at a point.
    pub fn fields(&self, t: f64, x: f64, y: f64, z: f64) -> [f64; 4] {
        let c = self.amp * self.theta(t, x, y, z).cos();
        [-self.omega() * c, self.k[0] * c, self.k[1] * c, self.k[2] * c]
    }
}

/// Travelling wave in null-plane coordinates: psi = amp sin(theta) with
/// theta = kx x + ky y + (kz - w) z - w u and w = |k|. Any wave vector
/// gives an exact solution of the reduced system; kx, ky must be harmonics
/// of the periodic box.
#[derive(Clone, Copy, Debug)]
pub struct PlaneWave {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
    pub amp: f64,
}

impl PlaneWave {
    fn omega(&self) -> f64 {
        (self.kx * self.kx + self.ky * self.ky + self.kz * self.kz).sqrt()
    }

    fn theta(&self, u: f64, z: f64, x: f64, y: f64) -> f64 {
        self.kx * x + self.ky * y + (self.kz - self.omega()) * z - self.omega() * u
    }

    pub fn psi(&self, u: f64, z: f64, x: f64, y: f64) -> f64 {
        self.amp * self.theta(u, z, x, y).sin()
    }

    /// (R, P, Q) at a point.
    pub fn fields(&self, u: f64, z: f64, x: f64, y: f64) -> [f64; 3] {
        let c = self.amp * self.theta(u, z, x, y).cos();
        [(self.kz - self.omega()) * c, self.kx * c, self.ky * c]
    }

    /// First-derivative set (R_x, R_y, R_z, P_x, Q_x, P_y, Q_y).
    pub fn wfields(&self, u: f64, z: f64, x: f64, y: f64) -> [f64; 7] {
        let s = -self.amp * self.theta(u, z, x, y).sin();
        let kn = self.kz - self.omega();
        [
            kn * self.kx * s,
            kn * self.ky * s,
            kn * kn * s,
            self.kx * self.kx * s,
            self.kx * self.ky * s,
            self.kx * self.ky * s,
            self.ky * self.ky * s,
        ]
    }

    /// Rate of change of P along the marching direction.
    pub fn p_rate(&self, u: f64, z: f64, x: f64, y: f64) -> f64 {
        self.amp * self.kx * self.omega() * self.theta(u, z, x, y).sin()
    }
}

/// Ingoing spherical pulse g = h(u + 2r), i.e. psi = h(t + r)/r; exact for
/// any profile h, with purely radial content.
#[derive(Clone, Copy, Debug)]
pub struct IngoingPulse {
    pub profile: Profile,
}

impl IngoingPulse {
    pub fn g(&self, u: f64, r: f64) -> f64 {
        self.profile.d(u + 2.0 * r, 0)
    }

    /// (R, P, Q) at a point.
    pub fn fields(&self, u: f64, r: f64, _s: f64, _phi: f64) -> [f64; 3] {
        [2.0 * self.profile.d(u + 2.0 * r, 1), 0.0, 0.0]
    }

    pub fn wfields(&self, u: f64, r: f64, _s: f64, _phi: f64) -> [f64; 7] {
        [0.0, 0.0, 4.0 * self.profile.d(u + 2.0 * r, 2), 0.0, 0.0, 0.0, 0.0]
    }

    pub fn p_rate(&self, _u: f64, _r: f64, _s: f64, _phi: f64) -> f64 {
        0.0
    }
}

/// Dipole solution g = Y(s, phi) G(u, r) with G = -f'(u) - f(u)/r. The
/// upright form uses Y = s, the tilted one Y = lam cos(phi) (the same
/// dipole rotated onto the x axis); the tilted form has 1/lam factors in
/// its derivative set that grow toward the axis cells.
#[derive(Clone, Copy, Debug)]
pub struct DipoleWave {
    pub profile: Profile,
    pub tilted: bool,
}

impl DipoleWave {
    fn radial(&self, u: f64, r: f64) -> (f64, f64, f64) {
        let f0 = self.profile.d(u, 0);
        let f1 = self.profile.d(u, 1);
        (f0, -f1 - f0 / r, -self.profile.d(u, 2) - f1 / r)
    }

    pub fn g(&self, u: f64, r: f64, s: f64, phi: f64) -> f64 {
        let (_, g, _) = self.radial(u, r);
        if self.tilted {
            (1.0 - s * s).sqrt() * phi.cos() * g
        } else {
            s * g
        }
    }

    /// (R, P, Q) at a point.
    pub fn fields(&self, u: f64, r: f64, s: f64, phi: f64) -> [f64; 3] {
        let lam = (1.0 - s * s).sqrt();
        let (f0, g, _) = self.radial(u, r);
        if self.tilted {
            [
                lam * phi.cos() * f0 / (r * r),
                -s * phi.cos() * g / r,
                -phi.sin() * g / r,
            ]
        } else {
            [s * f0 / (r * r), lam * g / r, 0.0]
        }
    }

    pub fn wfields(&self, u: f64, r: f64, s: f64, phi: f64) -> [f64; 7] {
        let lam = (1.0 - s * s).sqrt();
        let (f0, g, _) = self.radial(u, r);
        let r2 = r * r;
        let r3 = r2 * r;
        if self.tilted {
            let (cp, sp) = (phi.cos(), phi.sin());
            [
                -s * cp * f0 / r3,
                -sp * f0 / r3,
                -2.0 * lam * cp * f0 / r3,
                -(1.0 - 2.0 * s * s) * cp * g / (lam * r2),
                s * sp * g / (lam * r2),
                0.0,
                -cp * g / (lam * r2),
            ]
        } else {
            [
                lam * f0 / r3,
                0.0,
                -2.0 * s * f0 / r3,
                -2.0 * s * g / r2,
                0.0,
                0.0,
                0.0,
            ]
        }
    }

    pub fn p_rate(&self, u: f64, r: f64, s: f64, phi: f64) -> f64 {
        let lam = (1.0 - s * s).sqrt();
        let (_, _, gu) = self.radial(u, r);
        if self.tilted {
            -s * phi.cos() * gu / r
        } else {
            lam * gu / r
        }
    }
}
