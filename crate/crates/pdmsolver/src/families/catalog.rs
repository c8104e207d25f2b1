//! Built-in mass profiles. All are strictly positive on any grid for
//! parameters inside the stated ranges, so they are safe defaults for
//! sweeps and regression baselines.

use crate::expr::{parse, Expr, Params};

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CatalogMass {
    pub name: &'static str,
    pub expression: &'static str,
    /// Default parameter bindings.
    pub defaults: &'static [(&'static str, f64)],
    /// Human-readable validity range.
    pub range: &'static str,
}

pub const CATALOG: &[CatalogMass] = &[
    CatalogMass {
        name: "constant",
        expression: "m0",
        defaults: &[("m0", 1.0)],
        range: "m0 > 0",
    },
    CatalogMass {
        name: "sech2",
        expression: "m0*sech(w*x)^2",
        defaults: &[("m0", 1.0), ("w", 1.2)],
        range: "m0 > 0, w != 0",
    },
    CatalogMass {
        name: "exp",
        expression: "exp(lambda*x)",
        defaults: &[("lambda", 0.5)],
        range: "any real lambda",
    },
    CatalogMass {
        name: "gauss",
        expression: "m0*(1 + A*exp(-x^2))",
        defaults: &[("m0", 1.0), ("A", 1.0)],
        range: "m0 > 0, A > -1",
    },
    CatalogMass {
        name: "rational",
        expression: "m0/(1 + x^2)",
        defaults: &[("m0", 1.0)],
        range: "m0 > 0",
    },
];

impl CatalogMass {
    pub fn expr(&self) -> Expr {
        parse(self.expression).expect("catalog expressions parse")
    }

    pub fn default_params(&self) -> Params {
        self.defaults
            .iter()
            .map(|(n, v)| (n.to_string(), *v))
            .collect()
    }
}

pub fn find(name: &str) -> Option<&'static CatalogMass> {
    CATALOG.iter().find(|c| c.name == name)
}
