use serde::{Deserialize, Serialize};

use super::Fddds;
use crate::bits::Bits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    /// Constant cells beyond the left and right edges.
    Fixed {
        left: bool,
        right: bool,
    },
    /// Edge cells come from a 2-bit environment state `(left, right)`.
    Environment,
}

/// Elementary cellular automaton with Wolfram rule numbering; cell 0 is the
/// leftmost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcaSpec {
    pub rule: u8,
    pub width: usize,
    pub boundary: Boundary,
}

impl EcaSpec {
    pub fn new(rule: u8, width: usize, boundary: Boundary) -> Self {
        EcaSpec { rule, width, boundary }
    }

    #[inline]
    pub fn apply(&self, l: bool, c: bool, r: bool) -> bool {
        let idx = (l as u8) << 2 | (c as u8) << 1 | r as u8;
        (self.rule >> idx) & 1 == 1
    }
}

impl Fddds for EcaSpec {
    fn id(&self) -> String {
        let b = match self.boundary {
            Boundary::Periodic => "periodic".to_string(),
            Boundary::Fixed { left, right } => format!("fixed{}{}", left as u8, right as u8),
            Boundary::Environment => "env".to_string(),
        };
        format!("eca(rule={},width={},{b})", self.rule, self.width)
    }

    fn state_width(&self) -> usize {
        self.width
    }

    fn env_width(&self) -> usize {
        match self.boundary {
            Boundary::Environment => 2,
            _ => 0,
        }
    }

    fn advance(&self, state: &Bits, env: &Bits, _t: u64) -> Bits {
        let n = self.width;
        if n == 0 {
            return Bits::new();
        }
        let (lb, rb) = match self.boundary {
            Boundary::Periodic => (state[n - 1], state[0]),
            Boundary::Fixed { left, right } => (left, right),
            Boundary::Environment => (env[0], env[1]),
        };
        (0..n)
            .map(|i| {
                let l = if i == 0 { lb } else { state[i - 1] };
                let r = if i + 1 == n { rb } else { state[i + 1] };
                self.apply(l, state[i], r)
            })
            .collect()
    }
}
