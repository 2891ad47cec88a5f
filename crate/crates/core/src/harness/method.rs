use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::AnalyticMethod;
use crate::swarm::CostId;

/// One row of a benchmark table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic(AnalyticMethod),
    Pso(CostId),
}

impl Method {
    /// The 6 analytic methods followed by PSO-f1..PSO-f16.
    pub fn all() -> Vec<Method> {
        AnalyticMethod::ALL
            .into_iter()
            .map(Method::Analytic)
            .chain(CostId::all().map(Method::Pso))
            .collect()
    }

    pub fn is_pso(&self) -> bool {
        matches!(self, Method::Pso(_))
    }

    /// Lower-case name accepted on the command line, e.g. `rls-rel`, `pso-f3`.
    pub fn cli_name(&self) -> String {
        self.to_string().to_ascii_lowercase()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Analytic(m) => write!(f, "{m}"),
            Method::Pso(id) => write!(f, "PSO-{id}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("pso-") {
            return rest
                .parse()
                .map(Method::Pso)
                .map_err(|_| Error::Parse(format!("unknown method '{s}'")));
        }
        t.parse()
            .map(Method::Analytic)
            .map_err(|_| Error::Parse(format!("unknown method '{s}'")))
    }
}
