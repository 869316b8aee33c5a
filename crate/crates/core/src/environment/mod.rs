//! Floor plan of the ward: a rectangular grid of walls, floor and labeled
//! locations, plus the path and visibility queries the agents rely on.
//!
//! A [`GridMap`] never changes after it is parsed. Distance fields toward
//! labels are computed once at construction; fields toward individual cells
//! are computed the first time they are asked for and cached, so one map can
//! be shared between concurrently running simulations.

mod path;
mod sight;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use path::{shortest_path, Path, PathError};
pub use sight::{line_of_sight, ray_cells};

/// Distance value for cells that cannot be reached.
pub const UNREACHABLE: u32 = u32::MAX;

/// A cell coordinate: `x` is the column, `y` the row (row 0 is the top line of
/// the map file).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    pub fn manhattan(self, other: Position) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.x, self.y)
    }
}

impl std::str::FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (x, y) = s.split_once(':').ok_or_else(|| format!("bad position '{s}'"))?;
        let x = x.parse().map_err(|_| format!("bad position '{s}'"))?;
        let y = y.parse().map_err(|_| format!("bad position '{s}'"))?;
        Ok(Position { x, y })
    }
}

/// What a labeled location is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    PwdHome,
    NurseBase,
    AppointmentSite,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::PwdHome => "pwd_home",
            Role::NurseBase => "nurse_base",
            Role::AppointmentSite => "appointment_site",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellKind {
    Wall,
    Floor,
    Labeled(String),
}

impl CellKind {
    pub fn is_traversable(&self) -> bool {
        !matches!(self, CellKind::Wall)
    }
}

/// One legend entry: the glyph's location label and its role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegendEntry {
    pub label: String,
    pub role: Role,
}

impl LegendEntry {
    pub fn new(label: impl Into<String>, role: Role) -> Self {
        Self { label: label.into(), role }
    }
}

pub type Legend = BTreeMap<char, LegendEntry>;

pub const WALL_GLYPH: char = '#';
pub const FLOOR_GLYPH: char = '.';
pub const COMMENT_PREFIX: char = ';';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("map has no grid lines")]
    Empty,
    #[error("RaggedGrid: line {line} has {found} cells, expected {expected}")]
    RaggedGrid { line: usize, expected: usize, found: usize },
    #[error("UnknownGlyph: '{glyph}' at line {line}, column {column} is not in the legend")]
    UnknownGlyph { glyph: char, line: usize, column: usize },
    #[error("DisconnectedMap: '{label}' at {at} is unreachable from '{from}'")]
    DisconnectedMap { label: String, at: Position, from: String },
    #[error("MissingRole: no {role} location '{label}' on the map")]
    MissingRole { label: String, role: Role },
    #[error("home '{label}' must be exactly one cell, found {cells}")]
    HomeNotSingleCell { label: String, cells: usize },
    #[error("legend gives label '{label}' two different roles")]
    LegendConflict { label: String },
    #[error("legend glyph '{glyph}' is reserved")]
    ReservedGlyph { glyph: char },
}

#[derive(Debug, Clone)]
pub struct GridMap {
    width: u32,
    height: u32,
    cells: Vec<CellKind>,
    locations: BTreeMap<String, Vec<Position>>,
    roles: BTreeMap<String, Role>,
    glyphs: BTreeMap<String, char>,
    label_fields: BTreeMap<String, Box<[u32]>>,
    cell_fields: Box<[OnceLock<Box<[u32]>>]>,
}

impl PartialEq for GridMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.cells == other.cells
            && self.locations == other.locations
            && self.roles == other.roles
    }
}

/// Parses map text using `legend` for every glyph other than `#` and `.`.
pub fn parse_map(text: &str, legend: &Legend) -> Result<GridMap, MapError> {
    for &glyph in legend.keys() {
        if glyph == WALL_GLYPH || glyph == FLOOR_GLYPH || glyph == COMMENT_PREFIX {
            return Err(MapError::ReservedGlyph { glyph });
        }
    }
    let mut roles = BTreeMap::new();
    let mut glyphs = BTreeMap::new();
    for (&glyph, entry) in legend {
        match roles.insert(entry.label.clone(), entry.role) {
            Some(previous) if previous != entry.role => {
                return Err(MapError::LegendConflict { label: entry.label.clone() })
            }
            _ => {}
        }
        glyphs.entry(entry.label.clone()).or_insert(glyph);
    }

    let mut rows: Vec<(usize, Vec<char>)> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.starts_with(COMMENT_PREFIX) || line.trim().is_empty() {
            continue;
        }
        rows.push((index + 1, line.chars().collect()));
    }
    let Some((_, first)) = rows.first() else {
        return Err(MapError::Empty);
    };
    let width = first.len();
    let mut cells = Vec::with_capacity(width * rows.len());
    let mut locations: BTreeMap<String, Vec<Position>> = BTreeMap::new();
    for (y, (line_no, row)) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(MapError::RaggedGrid { line: *line_no, expected: width, found: row.len() });
        }
        for (x, &glyph) in row.iter().enumerate() {
            let kind = match glyph {
                WALL_GLYPH => CellKind::Wall,
                FLOOR_GLYPH => CellKind::Floor,
                other => match legend.get(&other) {
                    Some(entry) => {
                        locations
                            .entry(entry.label.clone())
                            .or_default()
                            .push(Position::new(x as u32, y as u32));
                        CellKind::Labeled(entry.label.clone())
                    }
                    None => {
                        return Err(MapError::UnknownGlyph { glyph, line: *line_no, column: x + 1 })
                    }
                },
            };
            cells.push(kind);
        }
    }

    // Legend entries whose glyph never appears do not name a location.
    roles.retain(|label, _| locations.contains_key(label));
    for entry in legend.values() {
        if entry.role == Role::PwdHome {
            match locations.get(&entry.label) {
                None => {
                    return Err(MapError::MissingRole {
                        label: entry.label.clone(),
                        role: Role::PwdHome,
                    })
                }
                Some(cells) if cells.len() != 1 => {
                    return Err(MapError::HomeNotSingleCell {
                        label: entry.label.clone(),
                        cells: cells.len(),
                    })
                }
                _ => {}
            }
        }
    }
    glyphs.retain(|label, _| locations.contains_key(label));

    GridMap::assemble(width as u32, rows.len() as u32, cells, locations, roles, glyphs)
}

/// Renders the map back into the text format accepted by [`parse_map`].
pub fn serialize_map(map: &GridMap) -> String {
    let mut out = String::with_capacity((map.width as usize + 1) * map.height as usize);
    for y in 0..map.height {
        for x in 0..map.width {
            out.push(match map.cell(Position::new(x, y)) {
                CellKind::Wall => WALL_GLYPH,
                CellKind::Floor => FLOOR_GLYPH,
                CellKind::Labeled(label) => map.glyphs[label],
            });
        }
        out.push('\n');
    }
    out
}

impl GridMap {
    fn assemble(
        width: u32,
        height: u32,
        cells: Vec<CellKind>,
        locations: BTreeMap<String, Vec<Position>>,
        roles: BTreeMap<String, Role>,
        glyphs: BTreeMap<String, char>,
    ) -> Result<GridMap, MapError> {
        let cell_fields = (0..cells.len()).map(|_| OnceLock::new()).collect();
        let mut map = GridMap {
            width,
            height,
            cells,
            locations,
            roles,
            glyphs,
            label_fields: BTreeMap::new(),
            cell_fields,
        };

        // All labeled cells must lie in one connected component.
        if let Some((first_label, first_cells)) = map.locations.iter().next() {
            let reach = map.distance_field(&first_cells[..1]);
            for (label, cells) in &map.locations {
                for &cell in cells {
                    if reach[map.index(cell)] == UNREACHABLE {
                        return Err(MapError::DisconnectedMap {
                            label: label.clone(),
                            at: cell,
                            from: first_label.clone(),
                        });
                    }
                }
            }
        }

        let label_fields = map
            .locations
            .iter()
            .map(|(label, cells)| (label.clone(), map.distance_field(cells)))
            .collect();
        map.label_fields = label_fields;
        Ok(map)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn locations(&self) -> &BTreeMap<String, Vec<Position>> {
        &self.locations
    }

    pub fn roles(&self) -> &BTreeMap<String, Role> {
        &self.roles
    }

    pub fn role_of(&self, label: &str) -> Option<Role> {
        self.roles.get(label).copied()
    }

    /// Labels with the given role, in sorted order.
    pub fn labels_with_role(&self, role: Role) -> Vec<&str> {
        self.roles
            .iter()
            .filter(|(_, r)| **r == role)
            .map(|(label, _)| label.as_str())
            .collect()
    }

    pub fn cells_of(&self, label: &str) -> Option<&[Position]> {
        self.locations.get(label).map(Vec::as_slice)
    }

    pub fn in_bounds(&self, pos: Position) -> bool {
        pos.x < self.width && pos.y < self.height
    }

    pub fn cell(&self, pos: Position) -> &CellKind {
        &self.cells[self.index(pos)]
    }

    pub fn is_traversable(&self, pos: Position) -> bool {
        self.in_bounds(pos) && self.cell(pos).is_traversable()
    }

    pub fn is_wall(&self, pos: Position) -> bool {
        !self.is_traversable(pos)
    }

    /// True when `pos` is one of the cells carrying `label`.
    pub fn has_label(&self, pos: Position, label: &str) -> bool {
        matches!(self.cell(pos), CellKind::Labeled(l) if l == label)
    }

    pub(crate) fn index(&self, pos: Position) -> usize {
        pos.y as usize * self.width as usize + pos.x as usize
    }

    /// Traversable 4-neighbors in the fixed order up, right, down, left.
    pub fn neighbors(&self, pos: Position) -> impl Iterator<Item = Position> + '_ {
        let Position { x, y } = pos;
        let candidates = [
            y.checked_sub(1).map(|y| Position::new(x, y)),
            x.checked_add(1).map(|x| Position::new(x, y)),
            y.checked_add(1).map(|y| Position::new(x, y)),
            x.checked_sub(1).map(|x| Position::new(x, y)),
        ];
        candidates.into_iter().flatten().filter(move |&p| self.is_traversable(p))
    }

    /// Breadth-first distances from the nearest of `sources` to every cell.
    fn distance_field(&self, sources: &[Position]) -> Box<[u32]> {
        let mut dist = vec![UNREACHABLE; self.cells.len()].into_boxed_slice();
        let mut queue = VecDeque::new();
        for &s in sources {
            if self.is_traversable(s) && dist[self.index(s)] == UNREACHABLE {
                dist[self.index(s)] = 0;
                queue.push_back(s);
            }
        }
        while let Some(cur) = queue.pop_front() {
            let next = dist[self.index(cur)] + 1;
            for nb in self.neighbors(cur) {
                let i = self.index(nb);
                if dist[i] == UNREACHABLE {
                    dist[i] = next;
                    queue.push_back(nb);
                }
            }
        }
        dist
    }

    fn field_to(&self, target: Position) -> &[u32] {
        self.cell_fields[self.index(target)].get_or_init(|| self.distance_field(&[target]))
    }

    /// Shortest-path length in steps, `None` when unreachable or not traversable.
    pub fn distance(&self, from: Position, to: Position) -> Option<u32> {
        if !self.is_traversable(from) || !self.is_traversable(to) {
            return None;
        }
        let d = self.field_to(to)[self.index(from)];
        (d != UNREACHABLE).then_some(d)
    }

    /// Steps from `from` to the nearest cell of `label`.
    pub fn distance_to_label(&self, from: Position, label: &str) -> Option<u32> {
        let field = self.label_fields.get(label)?;
        let d = field[self.index(from)];
        (d != UNREACHABLE).then_some(d)
    }

    /// The next cell along the canonical shortest path toward `to`. Stays put
    /// when already there or when `to` is unreachable.
    pub fn step_toward(&self, from: Position, to: Position) -> Position {
        if from == to || !self.is_traversable(to) {
            return from;
        }
        descend(self, self.field_to(to), from)
    }

    /// The next cell along the canonical shortest path toward `label`.
    pub fn step_toward_label(&self, from: Position, label: &str) -> Position {
        match self.label_fields.get(label) {
            Some(field) => descend(self, field, from),
            None => from,
        }
    }
}

/// First neighbor in up/right/down/left order that is one step closer.
fn descend(map: &GridMap, field: &[u32], from: Position) -> Position {
    let here = field[map.index(from)];
    if here == 0 || here == UNREACHABLE {
        return from;
    }
    map.neighbors(from)
        .find(|&nb| field[map.index(nb)] == here - 1)
        .unwrap_or(from)
}
