use std::fmt;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
enum Eval {
    Scalar(ScalarFn),
    Vector(VectorFn),
}

/// A smooth differential form on the plane given by its coefficient
/// functions: `f` for 0-forms, `a₁ dx₁ + a₂ dx₂` for 1-forms and
/// `g dx₁∧dx₂` for 2-forms.
#[derive(Clone)]
pub struct AnalyticForm {
    degree: usize,
    eval: Eval,
}

impl fmt::Debug for AnalyticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticForm").field("degree", &self.degree).finish_non_exhaustive()
    }
}

impl AnalyticForm {
    pub fn zero_form(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            degree: 0,
            eval: Eval::Scalar(Arc::new(f)),
        }
    }

    pub fn one_form(f: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self {
            degree: 1,
            eval: Eval::Vector(Arc::new(f)),
        }
    }

    pub fn two_form(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            degree: 2,
            eval: Eval::Scalar(Arc::new(f)),
        }
    }

    /// The zero form of degree `k`.
    pub fn zero(k: usize) -> Self {
        match k {
            0 => Self::zero_form(|_, _| 0.0),
            1 => Self::one_form(|_, _| [0.0, 0.0]),
            2 => Self::two_form(|_, _| 0.0),
            _ => panic!("degree {k} is not in 0..=2"),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients at `(x, y)`; scalar forms use the first slot.
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        match &self.eval {
            Eval::Scalar(f) => [f(x, y), 0.0],
            Eval::Vector(f) => f(x, y),
        }
    }

    /// Scalar coefficient of a 0- or 2-form.
    pub fn scalar(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y)[0]
    }
}

/// A form with components in each degree; missing components are zero.
#[derive(Clone, Debug, Default)]
pub struct GradedForm {
    parts: [Option<AnalyticForm>; 3],
}

impl GradedForm {
    pub fn zero() -> Self {
        Self::default()
    }

    fn with(mut self, k: usize, form: AnalyticForm) -> Self {
        assert_eq!(form.degree(), k, "component degree");
        self.parts[k] = Some(form);
        self
    }

    pub fn with_zero(self, form: AnalyticForm) -> Self {
        self.with(0, form)
    }

    pub fn with_one(self, form: AnalyticForm) -> Self {
        self.with(1, form)
    }

    pub fn with_two(self, form: AnalyticForm) -> Self {
        self.with(2, form)
    }

    pub fn component(&self, k: usize) -> Option<&AnalyticForm> {
        self.parts.get(k).and_then(Option::as_ref)
    }
}
