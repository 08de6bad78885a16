//! Step budget shared by the evaluators.
//!
//! Every evaluation step and closure application ticks the budget once.
//! An exhausted budget aborts the run rather than looping forever on a
//! diverging input. The default budget is unlimited; tests and the
//! `STAGEC_FUEL` environment variable install finite ones.

use std::cell::Cell;
use std::fmt;

#[derive(Debug)]
pub struct Fuel {
    remaining: Cell<Option<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfFuel;

impl fmt::Display for OutOfFuel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "evaluation step budget exhausted")
    }
}

impl std::error::Error for OutOfFuel {}

impl Fuel {
    pub fn unlimited() -> Self {
        Fuel {
            remaining: Cell::new(None),
        }
    }

    pub fn limited(steps: u64) -> Self {
        Fuel {
            remaining: Cell::new(Some(steps)),
        }
    }

    pub fn tick(&self) -> Result<(), OutOfFuel> {
        match self.remaining.get() {
            None => Ok(()),
            Some(0) => Err(OutOfFuel),
            Some(n) => {
                self.remaining.set(Some(n - 1));
                Ok(())
            }
        }
    }
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel::unlimited()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unlimited_never_runs_out() {
        let fuel = Fuel::unlimited();
        for _ in 0..10_000 {
            assert_eq!(fuel.tick(), Ok(()));
        }
    }

    #[test]
    fn limited_runs_out_exactly() {
        let fuel = Fuel::limited(3);
        assert_eq!(fuel.tick(), Ok(()));
        assert_eq!(fuel.tick(), Ok(()));
        assert_eq!(fuel.tick(), Ok(()));
        assert_eq!(fuel.tick(), Err(OutOfFuel));
        assert_eq!(fuel.tick(), Err(OutOfFuel));
    }
}
