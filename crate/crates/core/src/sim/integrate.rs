use nalgebra::{DMatrix, DVector};

use super::scenario::Scenario;
use crate::error::{Error, FunnelViolation, Result};
use crate::funnel::{control_law, ControllerConfig};
use crate::reference::ReferenceSignal;
use crate::scalar::{lit, to_f64, Scalar};

/// Closed-loop vector field on the stacked state `(x; z)`.
///
/// With an internal model `ẋ = Ax + B(C̃z + w)`, `ż = Ãz + B̃w`, which is the
/// interconnection `(A_ic, B_ic)` driven by `w`; without one `ẋ = Ax + Bw`.
#[derive(Clone, Debug)]
pub struct ClosedLoop<'a, T: Scalar> {
    a: DMatrix<T>,
    b: DMatrix<T>,
    /// `C A^j`, `j = 0..r−1`
    output_maps: Vec<DMatrix<T>>,
    /// Maps `(x; z)` to `C̃z`; `None` without internal model.
    model_output: Option<DMatrix<T>>,
    plant_states: usize,
    reference: &'a ReferenceSignal<T>,
    controller: &'a ControllerConfig<T>,
}

/// Everything the vector field computes at one point.
#[derive(Clone, Debug)]
pub struct Evaluation<T: Scalar> {
    pub derivative: DVector<T>,
    /// `y^{(j)}` columns, `j = 0..r−1`
    pub y_derivs: DMatrix<T>,
    /// `y_ref^{(j)}` columns, `j = 0..r−1`
    pub y_ref_derivs: DMatrix<T>,
    /// `e_1..e_r` as columns.
    pub cascade: DMatrix<T>,
    pub psi: Vec<T>,
    pub k: T,
    pub w: DVector<T>,
    pub u: DVector<T>,
}

impl<'a, T: Scalar> ClosedLoop<'a, T> {
    pub fn new(scn: &'a Scenario<T>) -> Result<Self> {
        let (sys, _) = scn.closed_loop_plant()?;
        let r = scn.controller.r();
        let model_output = scn.internal_model.as_ref().map(|im| {
            let n = scn.plant.n();
            let mut out = DMatrix::zeros(im.m, sys.n());
            out.view_mut((0, n), (im.m, im.state_dim())).copy_from(&im.c_tilde);
            out
        });
        Ok(Self {
            output_maps: sys.output_derivative_maps(r),
            a: sys.a().clone(),
            b: sys.b().clone(),
            model_output,
            plant_states: scn.plant.n(),
            reference: &scn.reference,
            controller: &scn.controller,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn plant_states(&self) -> usize {
        self.plant_states
    }

    /// Evaluates the vector field, failing when any level leaves its funnel.
    pub fn evaluate(&self, t: T, state: &DVector<T>) -> Result<Evaluation<T>> {
        let r = self.controller.r();
        let m = self.b.ncols();
        let y_ref_derivs = self.reference.evaluate(t, r - 1);
        let mut y_derivs = DMatrix::zeros(m, r);
        for (j, map) in self.output_maps.iter().enumerate() {
            y_derivs.set_column(j, &(map * state));
        }
        let e_derivs = &y_derivs - &y_ref_derivs;

        let funnels = self.controller.funnels();
        let psi: Vec<T> = funnels.iter().map(|f| f.psi(t)).collect();
        // levels below r; level r is guarded inside the control law
        let cascade = self.controller.cascade_errors(&e_derivs);
        for (i, f) in funnels.iter().enumerate().take(r - 1) {
            let norm = cascade.column(i).norm();
            if !(f.phi(t) * norm < T::one()) {
                return Err(Error::FunnelViolation(FunnelViolation {
                    t: to_f64(t),
                    level: i + 1,
                    error_norm: to_f64(norm),
                    psi: to_f64(psi[i]),
                }));
            }
        }
        let out = control_law(self.controller, &e_derivs, t)?;
        let u = match &self.model_output {
            Some(map) => map * state + &out.w,
            None => out.w.clone(),
        };
        let derivative = &self.a * state + &self.b * &out.w;
        Ok(Evaluation {
            derivative,
            y_derivs,
            y_ref_derivs,
            cascade: out.cascade,
            psi,
            k: out.k,
            w: out.w,
            u,
        })
    }
}

/// `(ẋ, ż)` at `(t, x, z)`.
pub fn closed_loop_rhs<T: Scalar>(
    scn: &Scenario<T>,
    t: T,
    x: &DVector<T>,
    z: &DVector<T>,
) -> Result<(DVector<T>, DVector<T>)> {
    let cl = ClosedLoop::new(scn)?;
    let n = scn.plant.n();
    if x.len() != n || z.len() != cl.state_dim() - n {
        return Err(Error::Dimension("state does not match the scenario".into()));
    }
    let state = DVector::from_iterator(cl.state_dim(), x.iter().chain(z.iter()).copied());
    let d = cl.evaluate(t, &state)?.derivative;
    Ok((d.rows(0, n).into_owned(), d.rows(n, d.len() - n).into_owned()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    FunnelViolation(FunnelViolation),
    /// The state stopped being finite at `t`.
    NonFinite { t: f64 },
}

#[derive(Clone, Debug)]
pub struct Sample<T: Scalar> {
    pub t: T,
    pub y: DVector<T>,
    pub y_ref: DVector<T>,
    /// `e_1..e_r` as columns.
    pub errors: DMatrix<T>,
    pub psi: Vec<T>,
    pub k: T,
    pub w: DVector<T>,
    pub u: DVector<T>,
    pub x: DVector<T>,
    pub z: DVector<T>,
}

impl<T: Scalar> Sample<T> {
    /// `φ_i(t)‖e_i(t)‖`, zero where the boundary is infinite.
    pub fn occupancy(&self, level: usize) -> T {
        let psi = self.psi[level - 1];
        if psi.is_finite() {
            self.errors.column(level - 1).norm() / psi
        } else {
            T::zero()
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimulationTrace<T: Scalar> {
    pub samples: Vec<Sample<T>>,
    pub status: Termination,
    pub t_end: T,
    pub h: T,
    pub m: usize,
    pub r: usize,
    pub with_internal_model: bool,
}

impl<T: Scalar> SimulationTrace<T> {
    pub fn completed(&self) -> bool {
        self.status == Termination::Completed
    }
}

/// Number of grid points `floor(t_end/h) + 1`.
pub fn record_count<T: Scalar>(t_end: T, h: T) -> usize {
    (to_f64(t_end) / to_f64(h) + 1e-9).floor() as usize + 1
}

/// Validates the scenario and integrates it; a failed hypothesis is an error,
/// a funnel escape during integration is reported in the trace status.
pub fn integrate<T: Scalar>(scn: &Scenario<T>) -> Result<SimulationTrace<T>> {
    let report = scn.validate();
    if !report.passed() {
        return Err(Error::DesignCondition(report.issues.join("; ")));
    }
    simulate(scn)
}

/// Classical RK4 with fixed step; every stage is funnel-guarded. Skips the
/// hypothesis checks of [`integrate`].
pub fn simulate<T: Scalar>(scn: &Scenario<T>) -> Result<SimulationTrace<T>> {
    let cl = ClosedLoop::new(scn)?;
    let (_, mut state) = scn.closed_loop_plant()?;
    let n = cl.plant_states();
    let h = scn.h;
    let half = h / lit(2.0);
    let sixth = h / lit(6.0);
    let steps = record_count(scn.t_end, h) - 1;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut status = Termination::Completed;

    let violation = |e: Error| match e {
        Error::FunnelViolation(v) => Ok(Termination::FunnelViolation(v)),
        other => Err(other),
    };

    for step in 0..=steps {
        let t = h * lit(step as f64);
        let ev = match cl.evaluate(t, &state) {
            Ok(ev) => ev,
            Err(e) => {
                status = violation(e)?;
                break;
            }
        };
        samples.push(Sample {
            t,
            y: ev.y_derivs.column(0).into_owned(),
            y_ref: ev.y_ref_derivs.column(0).into_owned(),
            errors: ev.cascade.clone(),
            psi: ev.psi.clone(),
            k: ev.k,
            w: ev.w.clone(),
            u: ev.u.clone(),
            x: state.rows(0, n).into_owned(),
            z: state.rows(n, state.len() - n).into_owned(),
        });
        if step == steps {
            break;
        }
        let k1 = ev.derivative;
        let stages = cl
            .evaluate(t + half, &(&state + &k1 * half))
            .and_then(|k2| {
                let k3 = cl.evaluate(t + half, &(&state + &k2.derivative * half))?;
                let k4 = cl.evaluate(t + h, &(&state + &k3.derivative * h))?;
                Ok((k2.derivative, k3.derivative, k4.derivative))
            });
        let (k2, k3, k4) = match stages {
            Ok(k) => k,
            Err(e) => {
                status = violation(e)?;
                break;
            }
        };
        state += (k1 + (k2 + k3) * lit::<T>(2.0) + k4) * sixth;
        if state.iter().any(|v| !v.is_finite()) {
            status = Termination::NonFinite { t: to_f64(t + h) };
            break;
        }
    }

    Ok(SimulationTrace {
        samples,
        status,
        t_end: scn.t_end,
        h,
        m: scn.plant.m(),
        r: scn.controller.r(),
        with_internal_model: scn.internal_model.is_some(),
    })
}
