//! Instance files: herringbone JSON, value-table JSON, supermodular game
//! JSON and DIMACS CNF.

use std::path::Path;

use serde_json::Value;
use tarski_core::instances::{sat_lfp_instance, CnfFormula, HerringboneInstance};
use tarski_core::{GridFn, TableFn};
use tarski_games::SupermodularGame;

use crate::error::{CliError, Result};

pub enum Instance {
    Herringbone(HerringboneInstance),
    Table(TableFn),
    Cnf(CnfFormula),
    Game(SupermodularGame),
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

pub fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

impl Instance {
    pub fn load(path: &Path) -> Result<Self> {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if matches!(ext, "cnf" | "dimacs") {
            return Ok(Instance::Cnf(CnfFormula::parse_dimacs(&read_text(path)?)?));
        }
        Self::from_json(read_json(path)?)
    }

    pub fn from_json(value: Value) -> Result<Self> {
        let has = |k: &str| value.get(k).is_some();
        if has("path") && has("fixed_point") {
            let inst: HerringboneInstance = serde_json::from_value(value)?;
            inst.validate()?;
            Ok(Instance::Herringbone(inst))
        } else if has("strategy_boxes") {
            Ok(Instance::Game(SupermodularGame::from_json(value)?))
        } else if has("table") && has("sides") {
            Ok(Instance::Table(TableFn::from_json(value)?))
        } else {
            Err(CliError::Usage("unrecognized instance file: expected a herringbone, value table or game".into()))
        }
    }

    /// The grid function the solvers see. Games are not grid functions on
    /// their own; callers go through the best-response map instead.
    pub fn grid_fn(&self) -> Result<Option<Box<dyn GridFn>>> {
        Ok(match self {
            Instance::Herringbone(h) => Some(Box::new(h.oracle()?)),
            Instance::Table(t) => Some(Box::new(t.clone())),
            Instance::Cnf(c) => Some(Box::new(sat_lfp_instance(c)?)),
            Instance::Game(_) => None,
        })
    }
}
