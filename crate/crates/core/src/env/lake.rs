use std::fmt;
use std::str::FromStr;

use super::{check_action, Environment, StateKey};
use crate::error::{Error, Result};

/// The standard 8x8 FrozenLake map.
pub const STANDARD_MAP_8X8: [&str; 8] = [
    "SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF", "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG",
];

pub const DEFAULT_LAKE_HORIZON: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tile {
    Start,
    Frozen,
    Hole,
    Goal,
}

/// An 8x8 grid of `S`, `F`, `H` and `G` tiles with exactly one start.
#[derive(Clone, PartialEq, Eq)]
pub struct LakeMap {
    tiles: [[Tile; 8]; 8],
    start: (usize, usize),
}

impl LakeMap {
    pub fn standard() -> Self {
        STANDARD_MAP_8X8.join("\n").parse().expect("standard map is valid")
    }

    fn tile(&self, row: usize, col: usize) -> Tile {
        self.tiles[row][col]
    }

    pub fn is_hole(&self, row: usize, col: usize) -> bool {
        self.tile(row, col) == Tile::Hole
    }

    pub fn is_goal(&self, row: usize, col: usize) -> bool {
        self.tile(row, col) == Tile::Goal
    }

    pub fn start(&self) -> (usize, usize) {
        self.start
    }
}

impl FromStr for LakeMap {
    type Err = Error;

    /// Parses eight non-empty lines of eight tiles each.
    fn from_str(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if rows.len() != 8 {
            return Err(Error::Parse(format!(
                "lake map needs 8 rows, found {}",
                rows.len()
            )));
        }
        let mut tiles = [[Tile::Frozen; 8]; 8];
        let mut start = None;
        for (r, row) in rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != 8 {
                return Err(Error::Parse(format!(
                    "lake map row {r} has {} tiles, expected 8",
                    chars.len()
                )));
            }
            for (c, ch) in chars.into_iter().enumerate() {
                tiles[r][c] = match ch {
                    'S' => {
                        if start.replace((r, c)).is_some() {
                            return Err(Error::Parse("lake map has more than one start".into()));
                        }
                        Tile::Start
                    }
                    'F' => Tile::Frozen,
                    'H' => Tile::Hole,
                    'G' => Tile::Goal,
                    other => {
                        return Err(Error::Parse(format!(
                            "unknown lake tile `{other}` at row {r}, column {c}"
                        )))
                    }
                };
            }
        }
        let start = start.ok_or_else(|| Error::Parse("lake map has no start tile".into()))?;
        Ok(LakeMap { tiles, start })
    }
}

impl fmt::Debug for LakeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.tiles {
            let line: String = row
                .iter()
                .map(|t| match t {
                    Tile::Start => 'S',
                    Tile::Frozen => 'F',
                    Tile::Hole => 'H',
                    Tile::Goal => 'G',
                })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Action indices follow the gym convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LakeAction {
    Left = 0,
    Down = 1,
    Right = 2,
    Up = 3,
}

impl LakeAction {
    pub const ALL: [LakeAction; 4] = [
        LakeAction::Left,
        LakeAction::Down,
        LakeAction::Right,
        LakeAction::Up,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LakeState {
    pub row: usize,
    pub col: usize,
    pub steps_remaining: usize,
}

/// Non-slippery FrozenLake: moves are deterministic and clipped at the border.
#[derive(Debug, Clone)]
pub struct FrozenLake {
    map: LakeMap,
    horizon: usize,
}

impl FrozenLake {
    pub fn new(map: LakeMap, horizon: usize) -> Self {
        FrozenLake { map, horizon }
    }

    /// Standard 8x8 map with a 400 step horizon.
    pub fn standard() -> Self {
        Self::new(LakeMap::standard(), DEFAULT_LAKE_HORIZON)
    }

    pub fn map(&self) -> &LakeMap {
        &self.map
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

impl Environment for FrozenLake {
    type State = LakeState;

    fn name(&self) -> &str {
        "frozenlake"
    }

    fn initial(&self) -> LakeState {
        let (row, col) = self.map.start();
        LakeState {
            row,
            col,
            steps_remaining: self.horizon,
        }
    }

    fn num_actions(&self, state: &LakeState) -> usize {
        if self.is_terminal(state) {
            0
        } else {
            4
        }
    }

    fn transition(&self, state: &LakeState, action: usize) -> Result<LakeState> {
        check_action(self, state, action)?;
        let (mut row, mut col) = (state.row, state.col);
        match LakeAction::ALL[action] {
            LakeAction::Left => col = col.saturating_sub(1),
            LakeAction::Down => row = (row + 1).min(7),
            LakeAction::Right => col = (col + 1).min(7),
            LakeAction::Up => row = row.saturating_sub(1),
        }
        Ok(LakeState {
            row,
            col,
            steps_remaining: state.steps_remaining - 1,
        })
    }

    fn reward(&self, state: &LakeState) -> f64 {
        if self.map.is_goal(state.row, state.col) {
            1.0
        } else {
            0.0
        }
    }

    fn is_terminal(&self, state: &LakeState) -> bool {
        state.steps_remaining == 0
            || self.map.is_hole(state.row, state.col)
            || self.map.is_goal(state.row, state.col)
    }

    fn encode(&self, state: &LakeState) -> StateKey {
        let mut bytes = vec![state.row as u8, state.col as u8];
        bytes.extend_from_slice(&(state.steps_remaining as u32).to_le_bytes());
        StateKey::new(bytes)
    }

    fn describe(&self, state: &LakeState) -> String {
        format!("r{}c{}t{}", state.row, state.col, state.steps_remaining)
    }
}
