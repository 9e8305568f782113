//! Physical control waveforms from the effective drive.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fock::CatFrame;
use crate::linalg::C64;

use super::{EffectiveDrive, PathSpec};

/// Maps `Ω` to the physical controls of one cat mode, `H_c = χ a†a + ε a† + ε* a`.
///
/// Projecting `H_c` onto the cat pair gives
/// `Ωx = 4|α| Re(e^{−iξ}ε)/√(N+N−)`,
/// `Ωy = 4|α| e^{−2|α|²} Im(e^{−iξ}ε)/√(N+N−)` and
/// `Ωz = −χ|α|²(N+² − N−²)/(2N+N−)`, plus a multiple of `P_c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveMap {
    alpha_abs: f64,
    xi: f64,
    n_plus: f64,
    n_minus: f64,
}

/// Single-mode controls at one instant (rad/μs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleControls {
    pub chi: f64,
    pub eps: C64,
}

/// Two-mode controls at one instant (rad/μs); mode 1 controls, mode 2 is
/// the target.
///
/// `H_c2 = χ₁₂ n₁n₂ + n₁(λ a₂† + λ* a₂) + ε̃ a₂† + ε̃* a₂ + χ₁ n₁ + χ₂ n₂`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitControls {
    pub chi12: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub lam: C64,
    pub eps_t: C64,
}

impl DriveMap {
    pub fn new(frame: &CatFrame) -> Self {
        DriveMap {
            alpha_abs: frame.alpha_abs(),
            xi: frame.xi(),
            n_plus: frame.n_plus(),
            n_minus: frame.n_minus(),
        }
    }

    /// `⟨C+|a†a|C+⟩`
    pub fn photons_plus(&self) -> f64 {
        self.alpha_abs.powi(2) * self.n_minus / self.n_plus
    }

    /// `⟨C−|a†a|C−⟩`
    pub fn photons_minus(&self) -> f64 {
        self.alpha_abs.powi(2) * self.n_plus / self.n_minus
    }

    pub fn single(&self, omega: [f64; 3]) -> SingleControls {
        let a = self.alpha_abs;
        let (np, nm) = (self.n_plus, self.n_minus);
        let chi = -2.0 * omega[2] * np * nm / ((np * np - nm * nm) * a * a);
        let scale = (np * nm).sqrt() / (4.0 * a);
        let eps =
            C64::from_polar(scale, self.xi) * C64::new(omega[0], (2.0 * a * a).exp() * omega[1]);
        SingleControls { chi, eps }
    }

    /// Inverse of [`DriveMap::single`].
    pub fn omega_of(&self, c: SingleControls) -> [f64; 3] {
        let a = self.alpha_abs;
        let (np, nm) = (self.n_plus, self.n_minus);
        let rotated = c.eps * C64::from_polar(1.0, -self.xi);
        let scale = 4.0 * a / (np * nm).sqrt();
        [
            scale * rotated.re,
            scale * (-2.0 * a * a).exp() * rotated.im,
            -c.chi * a * a * (np * np - nm * nm) / (2.0 * np * nm),
        ]
    }

    /// Controls for a controlled rotation: the target evolves under `Ω·σ`
    /// only when the control mode is in `|C−⟩`.
    ///
    /// With the control in `|C±⟩` the target sees an effective
    /// `(χ₁₂ n± + χ₂) n₂ + (n± λ + ε̃) a₂† + h.c.`, where `n±` are the cat
    /// photon numbers. Requiring this to vanish for `C+` and to equal the
    /// single-mode controls for `C−` fixes `χ₁₂`, `λ`, `χ₂` and `ε̃`; `χ₁`
    /// removes the control-mode phase accrued through `χ₁₂`.
    pub fn two(&self, omega: [f64; 3]) -> TwoQubitControls {
        let s = self.single(omega);
        let n_p = self.photons_plus();
        let n_m = self.photons_minus();
        let gap = n_m - n_p;
        let chi12 = s.chi / gap;
        let lam = s.eps / gap;
        TwoQubitControls {
            chi12,
            chi1: -chi12 * 0.5 * (n_p + n_m),
            chi2: -chi12 * n_p,
            lam,
            // ε̃ = λ χ₂/χ₁₂ with the ratio taken in closed form
            eps_t: -lam * n_p,
        }
    }
}

/// Sampled waveforms.
#[derive(Clone, Debug, PartialEq)]
pub enum Channels {
    Single {
        chi: Vec<f64>,
        eps: Vec<C64>,
    },
    Two {
        chi12: Vec<f64>,
        chi1: Vec<f64>,
        chi2: Vec<f64>,
        lam: Vec<C64>,
        eps_t: Vec<C64>,
    },
}

/// Controls sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    grid: Vec<f64>,
    channels: Channels,
}

const SINGLE_HEADER: [&str; 4] = ["t", "chi", "eps_re", "eps_im"];
const TWO_HEADER: [&str; 8] = [
    "t", "chi12", "chi1", "chi2", "lam_re", "lam_im", "epst_re", "epst_im",
];

/// Formats with 15 significant digits.
pub(crate) fn fmt15(x: f64) -> String {
    format!("{x:.14e}")
}

impl PulseSchedule {
    pub fn new(grid: Vec<f64>, channels: Channels) -> Result<Self> {
        let n = grid.len();
        let lens: Vec<usize> = match &channels {
            Channels::Single { chi, eps } => vec![chi.len(), eps.len()],
            Channels::Two {
                chi12,
                chi1,
                chi2,
                lam,
                eps_t,
            } => vec![chi12.len(), chi1.len(), chi2.len(), lam.len(), eps_t.len()],
        };
        if lens.iter().any(|&l| l != n) {
            return Err(Error::DimensionMismatch(format!(
                "channel lengths {lens:?} differ from grid length {n}"
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "schedule grid must be strictly increasing".into(),
            ));
        }
        let s = PulseSchedule { grid, channels };
        if s.values().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "schedule contains non-finite values".into(),
            ));
        }
        Ok(s)
    }

    /// Samples single-mode controls of a drive.
    pub fn single_from_drive(drive: &EffectiveDrive, map: &DriveMap) -> Result<Self> {
        let mut chi = Vec::with_capacity(drive.times().len());
        let mut eps = Vec::with_capacity(drive.times().len());
        for j in 0..drive.times().len() {
            let o = [
                drive.channel(0)[j],
                drive.channel(1)[j],
                drive.channel(2)[j],
            ];
            let c = map.single(o);
            chi.push(c.chi);
            eps.push(c.eps);
        }
        Self::new(drive.times().to_vec(), Channels::Single { chi, eps })
    }

    /// Samples two-mode controls of a drive.
    pub fn two_from_drive(drive: &EffectiveDrive, map: &DriveMap) -> Result<Self> {
        let n = drive.times().len();
        let (mut chi12, mut chi1, mut chi2) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        let (mut lam, mut eps_t) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for j in 0..n {
            let o = [
                drive.channel(0)[j],
                drive.channel(1)[j],
                drive.channel(2)[j],
            ];
            let c = map.two(o);
            chi12.push(c.chi12);
            chi1.push(c.chi1);
            chi2.push(c.chi2);
            lam.push(c.lam);
            eps_t.push(c.eps_t);
        }
        Self::new(
            drive.times().to_vec(),
            Channels::Two {
                chi12,
                chi1,
                chi2,
                lam,
                eps_t,
            },
        )
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn channels(&self) -> &Channels {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self.channels, Channels::Two { .. })
    }

    /// Single-mode controls at sample `j`.
    pub fn single_at(&self, j: usize) -> Option<SingleControls> {
        match &self.channels {
            Channels::Single { chi, eps } => Some(SingleControls {
                chi: chi[j],
                eps: eps[j],
            }),
            Channels::Two { .. } => None,
        }
    }

    /// Two-mode controls at sample `j`.
    pub fn two_at(&self, j: usize) -> Option<TwoQubitControls> {
        match &self.channels {
            Channels::Two {
                chi12,
                chi1,
                chi2,
                lam,
                eps_t,
            } => Some(TwoQubitControls {
                chi12: chi12[j],
                chi1: chi1[j],
                chi2: chi2[j],
                lam: lam[j],
                eps_t: eps_t[j],
            }),
            Channels::Single { .. } => None,
        }
    }

    fn row(&self, j: usize) -> Vec<f64> {
        let mut r = vec![self.grid[j]];
        match &self.channels {
            Channels::Single { chi, eps } => r.extend([chi[j], eps[j].re, eps[j].im]),
            Channels::Two {
                chi12,
                chi1,
                chi2,
                lam,
                eps_t,
            } => r.extend([
                chi12[j],
                chi1[j],
                chi2[j],
                lam[j].re,
                lam[j].im,
                eps_t[j].re,
                eps_t[j].im,
            ]),
        }
        r
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.len()).flat_map(move |j| self.row(j))
    }

    /// Largest control magnitude over the grid (rad/μs).
    pub fn peak(&self) -> f64 {
        (0..self.grid.len())
            .flat_map(|j| {
                let r = self.row(j);
                match &self.channels {
                    Channels::Single { .. } => vec![r[1].abs(), C64::new(r[2], r[3]).norm()],
                    Channels::Two { .. } => vec![
                        r[1].abs(),
                        r[2].abs(),
                        r[3].abs(),
                        C64::new(r[4], r[5]).norm(),
                        C64::new(r[6], r[7]).norm(),
                    ],
                }
            })
            .fold(0.0, f64::max)
    }

    /// Writes the CSV form (header row, 15 significant digits).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        match self.channels {
            Channels::Single { .. } => out.write_record(SINGLE_HEADER)?,
            Channels::Two { .. } => out.write_record(TWO_HEADER)?,
        }
        for j in 0..self.grid.len() {
            out.write_record(self.row(j).into_iter().map(fmt15))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
            .map_err(|e| e.context(format!("writing {}", path.display())))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        let two = if header == SINGLE_HEADER {
            false
        } else if header == TWO_HEADER {
            true
        } else {
            return Err(Error::Config(format!(
                "unrecognized schedule header {header:?}"
            )));
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("row {}: cannot parse {s:?}", line + 2)))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(vals);
        }
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
        let ccol = |k: usize| {
            rows.iter()
                .map(|r| C64::new(r[k], r[k + 1]))
                .collect::<Vec<C64>>()
        };
        let channels = if two {
            Channels::Two {
                chi12: col(1),
                chi1: col(2),
                chi2: col(3),
                lam: ccol(4),
                eps_t: ccol(6),
            }
        } else {
            Channels::Single {
                chi: col(1),
                eps: ccol(2),
            }
        };
        Self::new(col(0), channels)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
            .map_err(|e| e.context(format!("reading {}", path.display())))
    }
}

/// Samples the single-qubit controls of `spec` at `n_steps + 1` points.
pub fn single_qubit_controls(
    spec: &PathSpec,
    frame: &CatFrame,
    n_steps: usize,
) -> Result<PulseSchedule> {
    let drive = EffectiveDrive::sample(spec, n_steps)?;
    PulseSchedule::single_from_drive(&drive, &DriveMap::new(frame))
}

/// Samples the two-qubit controls of `spec` at `n_steps + 1` points.
pub fn two_qubit_controls(
    spec: &PathSpec,
    frame: &CatFrame,
    n_steps: usize,
) -> Result<PulseSchedule> {
    let drive = EffectiveDrive::sample(spec, n_steps)?;
    PulseSchedule::two_from_drive(&drive, &DriveMap::new(frame))
}

/// Peak control amplitude relative to the cat gap. Values above 0.2 are
/// logged, since the drives must stay small against `E_gap`.
pub fn gap_margin(schedule: &PulseSchedule, e_gap: f64) -> f64 {
    let m = schedule.peak() / e_gap;
    if m > 0.2 {
        log::warn!("control peak is {m:.3} of the cat gap; leakage may be significant");
    }
    m
}
