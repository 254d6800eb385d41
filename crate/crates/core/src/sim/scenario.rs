use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::funnel::{check_k1, check_k2, epsilon_bounds, initial_errors, ControllerConfig, K1Report, K2Report};
use crate::internal_model::{check_alpha_condition, interconnect, InternalModelRealization};
use crate::lti::{classify, ClassificationReport, StateSpaceSystem};
use crate::reference::ReferenceSignal;
use crate::scalar::{lit, Scalar};

pub const DEFAULT_T_END: f64 = 5.0;
pub const DEFAULT_STEP: f64 = 1e-4;

/// Plant, optional internal model, reference, controller and horizon.
#[derive(Clone, Debug)]
pub struct Scenario<T: Scalar> {
    pub plant: StateSpaceSystem<T>,
    /// `None` runs the controller directly on the plant (`u = w`).
    pub internal_model: Option<InternalModelRealization<T>>,
    pub reference: ReferenceSignal<T>,
    pub controller: ControllerConfig<T>,
    pub x0: DVector<T>,
    /// Internal-model initial state; zero when absent.
    pub z0: Option<DVector<T>>,
    pub t_end: T,
    pub h: T,
}

impl<T: Scalar> Scenario<T> {
    pub fn new(
        plant: StateSpaceSystem<T>,
        internal_model: Option<InternalModelRealization<T>>,
        reference: ReferenceSignal<T>,
        controller: ControllerConfig<T>,
        x0: DVector<T>,
    ) -> Result<Self> {
        let scn = Self {
            plant,
            internal_model,
            reference,
            controller,
            x0,
            z0: None,
            t_end: lit(DEFAULT_T_END),
            h: lit(DEFAULT_STEP),
        };
        scn.check_dimensions()?;
        Ok(scn)
    }

    pub fn with_horizon(mut self, t_end: T, h: T) -> Result<Self> {
        if !(h > T::zero()) || !(t_end >= h) {
            return Err(Error::Scenario(format!(
                "need h > 0 and t_end >= h, got t_end = {t_end}, h = {h}"
            )));
        }
        self.t_end = t_end;
        self.h = h;
        Ok(self)
    }

    pub fn with_z0(mut self, z0: DVector<T>) -> Result<Self> {
        self.z0 = Some(z0);
        self.check_dimensions()?;
        Ok(self)
    }

    /// Same scenario with the internal model removed.
    pub fn without_internal_model(&self) -> Self {
        Self { internal_model: None, z0: None, ..self.clone() }
    }

    pub fn with_k_r(&self, k_r: T) -> Result<Self> {
        Ok(Self { controller: self.controller.with_k_r(k_r)?, ..self.clone() })
    }

    fn check_dimensions(&self) -> Result<()> {
        let (n, m) = (self.plant.n(), self.plant.m());
        if self.x0.len() != n {
            return Err(Error::Dimension(format!("x0 has length {}, plant has n = {n}", self.x0.len())));
        }
        if self.reference.m() != m {
            return Err(Error::Dimension(format!(
                "reference has {} channels, plant has m = {m}",
                self.reference.m()
            )));
        }
        if let Some(im) = &self.internal_model {
            if im.m != m {
                return Err(Error::Dimension(format!("internal model has {} channels, plant has m = {m}", im.m)));
            }
        }
        if let Some(z0) = &self.z0 {
            let expected = self.internal_model.as_ref().map_or(0, |im| im.state_dim());
            if z0.len() != expected {
                return Err(Error::Dimension(format!("z0 has length {}, expected {expected}", z0.len())));
            }
        }
        Ok(())
    }

    /// Internal-model initial state (zero by default).
    pub fn z0(&self) -> DVector<T> {
        match (&self.z0, &self.internal_model) {
            (Some(z), _) => z.clone(),
            (None, Some(im)) => DVector::zeros(im.state_dim()),
            (None, None) => DVector::zeros(0),
        }
    }

    /// The system the controller acts on and its stacked initial state.
    pub fn closed_loop_plant(&self) -> Result<(StateSpaceSystem<T>, DVector<T>)> {
        match &self.internal_model {
            None => Ok((self.plant.clone(), self.x0.clone())),
            Some(im) => {
                let ic = interconnect(&self.plant, im)?;
                let z0 = self.z0();
                let state = DVector::from_iterator(
                    self.x0.len() + z0.len(),
                    self.x0.iter().chain(z0.iter()).copied(),
                );
                Ok((ic.system().clone(), state))
            }
        }
    }

    /// Runs every hypothesis check and itemizes each failure.
    pub fn validate(&self) -> ValidationReport<T> {
        let mut issues = Vec::new();
        let classification = classify(&self.plant);
        if !classification.in_sigma_mr {
            issues.push(format!(
                "plant is not in the admissible class (relative degree {:?}, high-frequency gain positive definite: {}, minimum phase: {})",
                classification.relative_degree, classification.gamma_positive_definite, classification.minimum_phase
            ));
        }
        if classification.relative_degree.is_some_and(|r| r != self.controller.r()) {
            issues.push(format!(
                "controller has {} funnels but the plant has relative degree {}",
                self.controller.r(),
                classification.relative_degree.unwrap_or(0)
            ));
        }
        let membership = self.reference.verify_membership();
        if !membership {
            issues.push(format!("reference is not annihilated by alpha = {}", self.reference.alpha()));
        }
        let alpha_condition = self.internal_model.as_ref().map(|im| {
            if &im.alpha != self.reference.alpha() {
                issues.push(format!(
                    "internal model alpha = {} differs from reference alpha = {}",
                    im.alpha,
                    self.reference.alpha()
                ));
            }
            let ok = check_alpha_condition(&self.plant, &im.alpha);
            if !ok {
                issues.push("a root of alpha coincides with an invariant zero of the plant".into());
            }
            ok
        });

        let k1 = check_k1(&self.controller);
        if !k1.satisfied {
            issues.push(format!("K1 violated, margins {:?}", k1.margins));
        }

        let mut e0 = None;
        let mut k2 = None;
        let mut epsilon = None;
        match self
            .closed_loop_plant()
            .and_then(|(sys, s0)| initial_errors(&sys, &s0, &self.reference, &self.controller))
        {
            Ok(e) => {
                let rep = check_k2(&self.controller, &e);
                if !rep.satisfied {
                    issues.push(format!("K2 violated, initial occupancies {:?}", rep.occupancies));
                }
                epsilon = epsilon_bounds(&self.controller, &e).ok();
                k2 = Some(rep);
                e0 = Some(e);
            }
            Err(err) => issues.push(format!("initial errors unavailable: {err}")),
        }

        ValidationReport { classification, membership, alpha_condition, k1, e0, k2, epsilon, issues }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport<T: Scalar> {
    pub classification: ClassificationReport<T>,
    pub membership: bool,
    /// `None` without internal model.
    pub alpha_condition: Option<bool>,
    pub k1: K1Report<T>,
    /// `e_1(0)..e_r(0)` as columns.
    pub e0: Option<DMatrix<T>>,
    pub k2: Option<K2Report<T>>,
    pub epsilon: Option<Vec<T>>,
    pub issues: Vec<String>,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}
