//! Additive (IMEX) Runge-Kutta methods stored as a pair of Butcher tableaus.
//!
//! The explicit half integrates the non-stiff term and must be strictly lower
//! triangular; the implicit half is diagonally implicit, so every stage costs
//! one scalar (or diagonal) solve.
//!
//! Built-in coefficients:
//!
//! * `imex-rk1`: forward/backward Euler, the (1,1,1) scheme of Ascher, Ruuth
//!   and Spiteri (1997), §2.1.
//! * `imex-rk2`: the (2,3,2) scheme of Ascher, Ruuth and Spiteri (1997), §2.5.
//! * `imex-rk3`: ARK3(2)4L\[2\]SA of Kennedy and Carpenter (2003).
//! * `imex-rk4`: ARK4(3)6L\[2\]SA of Kennedy and Carpenter (2003).
//!
//! All four have an L-stable implicit part. The embedded error estimators of
//! the Kennedy-Carpenter pairs are not carried.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CONSISTENCY_TOL: f64 = 1e-12;

/// Identifier of one of the built-in schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodId {
    #[serde(rename = "imex-rk1")]
    ImexRk1,
    #[serde(rename = "imex-rk2")]
    ImexRk2,
    #[serde(rename = "imex-rk3")]
    ImexRk3,
    #[serde(rename = "imex-rk4")]
    ImexRk4,
}

impl MethodId {
    pub const ALL: [MethodId; 4] = [
        MethodId::ImexRk1,
        MethodId::ImexRk2,
        MethodId::ImexRk3,
        MethodId::ImexRk4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::ImexRk1 => "imex-rk1",
            MethodId::ImexRk2 => "imex-rk2",
            MethodId::ImexRk3 => "imex-rk3",
            MethodId::ImexRk4 => "imex-rk4",
        }
    }

    pub fn tableau(self) -> ImexTableau {
        match self {
            MethodId::ImexRk1 => imex_rk1(),
            MethodId::ImexRk2 => imex_rk2(),
            MethodId::ImexRk3 => imex_rk3(),
            MethodId::ImexRk4 => imex_rk4(),
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    /// Accepts the canonical `imex-rkN` names and the short `rkN` aliases.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "imex-rk1" | "rk1" => Ok(MethodId::ImexRk1),
            "imex-rk2" | "rk2" => Ok(MethodId::ImexRk2),
            "imex-rk3" | "rk3" => Ok(MethodId::ImexRk3),
            "imex-rk4" | "rk4" => Ok(MethodId::ImexRk4),
            _ => Err(Error::UnknownMethod(s.to_string())),
        }
    }
}

/// Dual Butcher tableau of an additive Runge-Kutta scheme.
///
/// Matrices are dense and row-major. The JSON field names (`aE`, `bE`, ...)
/// are the interchange format for user-supplied tableaus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImexTableau {
    pub id: String,
    pub s: usize,
    pub order: usize,
    #[serde(rename = "aE")]
    pub a_exp: Vec<Vec<f64>>,
    #[serde(rename = "bE")]
    pub b_exp: Vec<f64>,
    #[serde(rename = "cE")]
    pub c_exp: Vec<f64>,
    #[serde(rename = "aI")]
    pub a_imp: Vec<Vec<f64>>,
    #[serde(rename = "bI")]
    pub b_imp: Vec<f64>,
    #[serde(rename = "cI")]
    pub c_imp: Vec<f64>,
}

/// Look up a built-in scheme by name.
pub fn builtin_tableau(id: &str) -> Result<ImexTableau> {
    Ok(id.parse::<MethodId>()?.tableau())
}

impl ImexTableau {
    /// Parse a user-supplied tableau and reject it unless it validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let t: ImexTableau = serde_json::from_str(text)?;
        t.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidTableau {
                id: self.id,
                violations,
            })
        }
    }

    /// Lists every broken structural or consistency condition; empty when the
    /// tableau is usable.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let s = self.s;
        if s == 0 {
            out.push("stage count s must be positive".to_string());
            return out;
        }
        if self.order == 0 {
            out.push("order must be at least 1".to_string());
        }

        let square = |m: &Vec<Vec<f64>>| m.len() == s && m.iter().all(|r| r.len() == s);
        let mut shapes_ok = true;
        for (name, ok) in [
            ("aE", square(&self.a_exp)),
            ("aI", square(&self.a_imp)),
            ("bE", self.b_exp.len() == s),
            ("cE", self.c_exp.len() == s),
            ("bI", self.b_imp.len() == s),
            ("cI", self.c_imp.len() == s),
        ] {
            if !ok {
                out.push(format!("{name} has the wrong shape for s = {s}"));
                shapes_ok = false;
            }
        }
        if !shapes_ok {
            return out;
        }

        let all_finite = self
            .a_exp
            .iter()
            .chain(self.a_imp.iter())
            .flatten()
            .chain(self.b_exp.iter())
            .chain(self.b_imp.iter())
            .chain(self.c_exp.iter())
            .chain(self.c_imp.iter())
            .all(|v| v.is_finite());
        if !all_finite {
            out.push("non-finite coefficient".to_string());
            return out;
        }

        let strictly_lower = (0..s).all(|j| (j..s).all(|k| self.a_exp[j][k] == 0.0));
        if !strictly_lower {
            out.push("explicit tableau not strictly lower triangular".to_string());
        }
        let lower = (0..s).all(|j| (j + 1..s).all(|k| self.a_imp[j][k] == 0.0));
        if !lower {
            out.push("implicit tableau not lower triangular".to_string());
        }

        for j in 0..s {
            let row: f64 = self.a_exp[j].iter().sum();
            if (row - self.c_exp[j]).abs() > CONSISTENCY_TOL {
                out.push(format!("explicit row sum {row} ≠ c^E[{j}] = {}", self.c_exp[j]));
            }
            let row: f64 = self.a_imp[j].iter().sum();
            if (row - self.c_imp[j]).abs() > CONSISTENCY_TOL {
                out.push(format!("implicit row sum {row} ≠ c^I[{j}] = {}", self.c_imp[j]));
            }
        }

        let be: f64 = self.b_exp.iter().sum();
        if (be - 1.0).abs() > CONSISTENCY_TOL {
            out.push(format!("weight sum b^E = {be} ≠ 1"));
        }
        let bi: f64 = self.b_imp.iter().sum();
        if (bi - 1.0).abs() > CONSISTENCY_TOL {
            out.push(format!("weight sum b^I = {bi} ≠ 1"));
        }
        out
    }

    /// Number of stages with a nonzero implicit diagonal, i.e. the number of
    /// linear solves per step. Used as the default per-step cost.
    pub fn implicit_solves(&self) -> usize {
        (0..self.s).filter(|&j| self.a_imp[j][j] != 0.0).count()
    }

    /// Whether the explicit right-hand side evaluated at stage `j` is ever
    /// consumed (by a later stage or by the final update).
    pub fn explicit_stage_used(&self, j: usize) -> bool {
        self.b_exp[j] != 0.0 || (j + 1..self.s).any(|k| self.a_exp[k][j] != 0.0)
    }
}

fn frac(num: f64, den: f64) -> f64 {
    num / den
}

fn imex_rk1() -> ImexTableau {
    ImexTableau {
        id: "imex-rk1".into(),
        s: 2,
        order: 1,
        a_exp: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        b_exp: vec![1.0, 0.0],
        c_exp: vec![0.0, 1.0],
        a_imp: vec![vec![0.0, 0.0], vec![0.0, 1.0]],
        b_imp: vec![0.0, 1.0],
        c_imp: vec![0.0, 1.0],
    }
}

fn imex_rk2() -> ImexTableau {
    let gamma = (2.0 - 2f64.sqrt()) / 2.0;
    let delta = -2.0 * 2f64.sqrt() / 3.0;
    ImexTableau {
        id: "imex-rk2".into(),
        s: 3,
        order: 2,
        a_exp: vec![
            vec![0.0, 0.0, 0.0],
            vec![gamma, 0.0, 0.0],
            vec![delta, 1.0 - delta, 0.0],
        ],
        b_exp: vec![0.0, 1.0 - gamma, gamma],
        c_exp: vec![0.0, gamma, 1.0],
        a_imp: vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, gamma, 0.0],
            vec![0.0, 1.0 - gamma, gamma],
        ],
        b_imp: vec![0.0, 1.0 - gamma, gamma],
        c_imp: vec![0.0, gamma, 1.0],
    }
}

fn imex_rk3() -> ImexTableau {
    let g = frac(1767732205903.0, 4055673282236.0);
    let c2 = frac(1767732205903.0, 2027836641118.0);
    let b = vec![
        frac(1471266399579.0, 7840856788654.0),
        frac(-4482444167858.0, 7529755066697.0),
        frac(11266239266428.0, 11593286722821.0),
        g,
    ];
    ImexTableau {
        id: "imex-rk3".into(),
        s: 4,
        order: 3,
        a_exp: vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![c2, 0.0, 0.0, 0.0],
            vec![
                frac(5535828885825.0, 10492691773637.0),
                frac(788022342437.0, 10882634858940.0),
                0.0,
                0.0,
            ],
            vec![
                frac(6485989280629.0, 16251701735622.0),
                frac(-4246266847089.0, 9704473918619.0),
                frac(10755448449292.0, 10357097424841.0),
                0.0,
            ],
        ],
        b_exp: b.clone(),
        c_exp: vec![0.0, c2, 0.6, 1.0],
        a_imp: vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![g, g, 0.0, 0.0],
            vec![
                frac(2746238789719.0, 10658868560708.0),
                frac(-640167445237.0, 6845629431997.0),
                g,
                0.0,
            ],
            b.clone(),
        ],
        b_imp: b,
        c_imp: vec![0.0, c2, 0.6, 1.0],
    }
}

fn imex_rk4() -> ImexTableau {
    let g = 0.25;
    let b = vec![
        frac(82889.0, 524892.0),
        0.0,
        frac(15625.0, 83664.0),
        frac(69875.0, 102672.0),
        frac(-2260.0, 8211.0),
        g,
    ];
    let c = vec![0.0, 0.5, frac(83.0, 250.0), frac(31.0, 50.0), frac(17.0, 20.0), 1.0];
    ImexTableau {
        id: "imex-rk4".into(),
        s: 6,
        order: 4,
        a_exp: vec![
            vec![0.0; 6],
            vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![frac(13861.0, 62500.0), frac(6889.0, 62500.0), 0.0, 0.0, 0.0, 0.0],
            vec![
                frac(-116923316275.0, 2393684061468.0),
                frac(-2731218467317.0, 15368042101831.0),
                frac(9408046702089.0, 11113171139209.0),
                0.0,
                0.0,
                0.0,
            ],
            vec![
                frac(-451086348788.0, 2902428689909.0),
                frac(-2682348792572.0, 7519795681897.0),
                frac(12662868775082.0, 11960479115383.0),
                frac(3355817975965.0, 11060851509271.0),
                0.0,
                0.0,
            ],
            vec![
                frac(647845179188.0, 3216320057751.0),
                frac(73281519250.0, 8382639484533.0),
                frac(552539513391.0, 3454668386233.0),
                frac(3354512671639.0, 8306763924573.0),
                frac(4040.0, 17871.0),
                0.0,
            ],
        ],
        b_exp: b.clone(),
        c_exp: c.clone(),
        a_imp: vec![
            vec![0.0; 6],
            vec![g, g, 0.0, 0.0, 0.0, 0.0],
            vec![frac(8611.0, 62500.0), frac(-1743.0, 31250.0), g, 0.0, 0.0, 0.0],
            vec![
                frac(5012029.0, 34652500.0),
                frac(-654441.0, 2922500.0),
                frac(174375.0, 388108.0),
                g,
                0.0,
                0.0,
            ],
            vec![
                frac(15267082809.0, 155376265600.0),
                frac(-71443401.0, 120774400.0),
                frac(730878875.0, 902184768.0),
                frac(2285395.0, 8070912.0),
                g,
                0.0,
            ],
            b.clone(),
        ],
        b_imp: b,
        c_imp: c,
    }
}
