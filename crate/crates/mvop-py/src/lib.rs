//! Python bindings: a `Family` object with exact and asymptotic evaluators, a few special
//! functions, and `run` for the command pipelines.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use mvop::asym::{
    asym_b2, endpoint_eval, inner_eval, mehler_heine, outer_eval, predicted_det, predicted_zero_points, AsymContext,
};
use mvop::exact::{det_zeros, nodes_for, stieltjes, RecurrenceTable};
use mvop::harness::{cmd_compare, cmd_figure, cmd_recurrence, cmd_validate, HarnessError, Outcome, Regime, RunConfig};
use mvop::matcore::{CMatrix, C64};
use mvop::weights::{custom_family, gegenbauer_block2, gegenbauer_family, jacobi_family, WeightFamily};

create_exception!(mvop_py, MvopError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    MvopError::new_err(e.to_string())
}

type Matrix = Vec<Vec<C64>>;

fn rows(m: &CMatrix) -> Matrix {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m[(i, j)]).collect()).collect()
}

/// A weight family with its recurrence table, built on first use and extended on demand.
#[pyclass(module = "mvop_py")]
struct Family {
    fam: WeightFamily,
    table: Option<RecurrenceTable>,
    ctx: Option<AsymContext>,
}

impl Family {
    fn wrap(r: Result<WeightFamily, impl std::fmt::Display>) -> PyResult<Self> {
        Ok(Family { fam: r.map_err(err)?, table: None, ctx: None })
    }

    fn table(&mut self, n: usize) -> PyResult<&RecurrenceTable> {
        if self.table.as_ref().is_none_or(|t| t.nmax <= n) {
            let nmax = (n + 1).max(32);
            self.table = Some(stieltjes(&self.fam, nmax, nodes_for(&self.fam, nmax)).map_err(err)?);
        }
        Ok(self.table.as_ref().expect("table built above"))
    }

    fn ctx(&mut self) -> PyResult<&AsymContext> {
        if self.ctx.is_none() {
            self.ctx = Some(AsymContext::new(&self.fam).map_err(err)?);
        }
        Ok(self.ctx.as_ref().expect("context built above"))
    }
}

#[pymethods]
impl Family {
    #[staticmethod]
    #[pyo3(signature = (alpha = 1.0, beta = 2.0, k = 1.0, ell = 1))]
    fn jacobi(alpha: f64, beta: f64, k: f64, ell: usize) -> PyResult<Self> {
        Self::wrap(jacobi_family(alpha, beta, k, ell))
    }

    /// `two_ell` is twice the (half-)integer block parameter; the size is `two_ell + 1`.
    #[staticmethod]
    #[pyo3(signature = (nu = 0.5, two_ell = 2))]
    fn gegenbauer(nu: f64, two_ell: usize) -> PyResult<Self> {
        Self::wrap(gegenbauer_family(nu, two_ell))
    }

    #[staticmethod]
    #[pyo3(signature = (nu = 0.5))]
    fn gegenbauer_block(nu: f64) -> PyResult<Self> {
        Self::wrap(gegenbauer_block2(nu))
    }

    /// `coeffs[d][i][j]` is the coefficient of `x^d` in `H(x)`.
    #[staticmethod]
    fn custom(alpha: f64, beta: f64, coeffs: Vec<Vec<Vec<f64>>>) -> PyResult<Self> {
        Self::wrap(custom_family(alpha, beta, &coeffs))
    }

    #[getter]
    fn size(&self) -> usize {
        self.fam.r
    }

    #[getter]
    fn label(&self) -> String {
        self.fam.label.clone()
    }

    fn weight(&self, x: f64) -> Matrix {
        rows(&self.fam.weight(x))
    }

    /// `(B, C, Gamma)` for `n < nmax`; `C[0]` is zero.
    fn recurrence(&mut self, nmax: usize) -> PyResult<(Vec<Matrix>, Vec<Matrix>, Vec<Matrix>)> {
        let t = stieltjes(&self.fam, nmax, nodes_for(&self.fam, nmax)).map_err(err)?;
        let conv = |s: &[CMatrix]| s.iter().map(rows).collect();
        Ok((conv(&t.b), conv(&t.c), conv(&t.gamma)))
    }

    /// `2^n P_n(x)`.
    fn p_scaled(&mut self, n: usize, x: f64) -> PyResult<Matrix> {
        Ok(rows(&self.table(n)?.eval_scaled(n, x).map_err(err)?))
    }

    /// `2^n P_n(z) / phi(z)^n`.
    fn p_outer(&mut self, n: usize, z: C64) -> PyResult<Matrix> {
        Ok(rows(&self.table(n)?.eval_outer(n, z).map_err(err)?))
    }

    fn det_zeros(&mut self, n: usize) -> PyResult<Vec<f64>> {
        det_zeros(self.table(n)?, n).map_err(err)
    }

    #[pyo3(signature = (n, z, order = 1))]
    fn outer(&mut self, n: usize, z: C64, order: usize) -> PyResult<Matrix> {
        Ok(rows(&outer_eval(self.ctx()?, n, z, order).map_err(err)?))
    }

    fn inner(&mut self, n: usize, x: f64) -> PyResult<Matrix> {
        Ok(rows(&inner_eval(self.ctx()?, n, x).map_err(err)?))
    }

    fn endpoint(&mut self, n: usize, x: f64) -> PyResult<Matrix> {
        Ok(rows(&endpoint_eval(self.ctx()?, n, x).map_err(err)?))
    }

    fn mehler_heine(&mut self, theta: f64) -> PyResult<Matrix> {
        Ok(rows(&mehler_heine(self.ctx()?, theta).map_err(err)?))
    }

    fn b2(&mut self) -> PyResult<Matrix> {
        Ok(rows(&asym_b2(self.ctx()?).map_err(err)?))
    }

    fn predicted_zeros(&self, n: usize) -> PyResult<Vec<f64>> {
        predicted_zero_points(&self.fam, n).map_err(err)
    }

    fn predicted_det(&self, n: usize, x: f64) -> PyResult<f64> {
        predicted_det(&self.fam, n, x).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Family({})", self.fam.label)
    }
}

#[pyfunction]
fn bessel_j(order: f64, x: f64) -> PyResult<f64> {
    mvop::specfun::bessel_j(order, x).map_err(err)
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    mvop::specfun::gamma_real(x).map_err(err)
}

#[pyfunction]
fn phi(z: C64) -> PyResult<C64> {
    mvop::specfun::phi_map(z).map_err(err)
}

/// Runs `recurrence`, `validate`, `compare:<regime>` or `figure:<id>` on a JSON config and
/// returns `(exit_code, primary_artifact, summary_lines)`.
#[pyfunction]
#[pyo3(signature = (command, config = "{}"))]
fn run(command: &str, config: &str) -> PyResult<(i32, String, Vec<String>)> {
    let outcome = || -> Result<Outcome, HarnessError> {
        let cfg = RunConfig::from_json(config)?;
        match command.split_once(':') {
            None if command == "recurrence" => cmd_recurrence(&cfg),
            None if command == "validate" => cmd_validate(&cfg),
            Some(("compare", r)) => cmd_compare(&cfg, r.parse::<Regime>().map_err(HarnessError::Config)?),
            Some(("figure", id)) => {
                let id = id.parse::<u8>().map_err(|e| HarnessError::Config(format!("figure id: {e}")))?;
                cmd_figure(id, &cfg)
            }
            _ => Err(HarnessError::Config(format!("unknown command {command:?}"))),
        }
    };
    match outcome() {
        Ok(o) => Ok((o.exit_code(), o.primary().content.clone(), o.summary)),
        Err(e) => Ok((e.exit_code(), String::new(), vec![e.to_string()])),
    }
}

#[pymodule]
fn mvop_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Family>()?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("MvopError", m.py().get_type::<MvopError>())?;
    Ok(())
}
