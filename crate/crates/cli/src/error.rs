use std::fmt;

use dynpanel::gmm::GmmError;
use dynpanel::montecarlo::McError;
use dynpanel::unitroot::UnitRootError;
use dynpanel::{EstimatorError, PanelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Numerical,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Usage => 1,
            Kind::Data => 2,
            Kind::Numerical => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, stage: &'static str, message: impl fmt::Display) -> Self {
        Self {
            kind,
            stage,
            message: message.to_string(),
        }
    }

    pub fn usage(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(Kind::Usage, stage, message)
    }

    pub fn data(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(Kind::Data, stage, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error during {}: {}", self.stage, self.message)
    }
}

fn panel_kind(e: &PanelError) -> Kind {
    match e {
        PanelError::InvalidSpec(_) => Kind::Usage,
        _ => Kind::Data,
    }
}

pub fn from_panel(stage: &'static str, e: PanelError) -> CliError {
    CliError::new(panel_kind(&e), stage, e)
}

pub fn from_estimator(stage: &'static str, e: EstimatorError) -> CliError {
    let kind = match &e {
        EstimatorError::Panel(p) => panel_kind(p),
        EstimatorError::TooFewPeriods { .. } => Kind::Data,
        _ => Kind::Numerical,
    };
    CliError::new(kind, stage, e)
}

pub fn from_gmm(stage: &'static str, e: GmmError) -> CliError {
    let kind = match &e {
        GmmError::Panel(p) => panel_kind(p),
        GmmError::TooFewPeriods { .. } => Kind::Data,
        _ => Kind::Numerical,
    };
    CliError::new(kind, stage, e)
}

pub fn from_unitroot(stage: &'static str, e: UnitRootError) -> CliError {
    let kind = match &e {
        UnitRootError::Panel(p) => panel_kind(p),
        UnitRootError::Entity { source, .. } if matches!(**source, UnitRootError::TooFewObservations { .. }) => {
            Kind::Data
        }
        UnitRootError::TooFewObservations { .. } | UnitRootError::MissingMoments { .. } | UnitRootError::Table(_) => {
            Kind::Data
        }
        UnitRootError::InvalidSpec(_) => Kind::Usage,
        _ => Kind::Numerical,
    };
    CliError::new(kind, stage, e)
}

pub fn from_mc(stage: &'static str, e: McError) -> CliError {
    let kind = match &e {
        McError::InvalidConfig(_) | McError::InvalidAlpha(_) => Kind::Usage,
        McError::DegenerateDenominator => Kind::Numerical,
    };
    CliError::new(kind, stage, e)
}
