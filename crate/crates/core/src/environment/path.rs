use thiserror::Error;

use super::{GridMap, Position};

/// A walk over 4-adjacent traversable cells, origin first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    cells: Vec<Position>,
}

impl Path {
    pub fn cells(&self) -> &[Position] {
        &self.cells
    }

    /// Number of moves, one less than the number of cells.
    pub fn steps(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn origin(&self) -> Position {
        self.cells[0]
    }

    pub fn destination(&self) -> Position {
        *self.cells.last().expect("path is never empty")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("{0} is not a traversable cell")]
    NotTraversable(Position),
    #[error("Unreachable: no path from {from} to {to}")]
    Unreachable { from: Position, to: Position },
}

/// Minimum-length 4-connected path. Among equally short paths the one that
/// prefers up, right, down, left at every step is returned, so repeated calls
/// and the agents' own stepping agree cell for cell.
pub fn shortest_path(map: &GridMap, from: Position, to: Position) -> Result<Path, PathError> {
    for p in [from, to] {
        if !map.is_traversable(p) {
            return Err(PathError::NotTraversable(p));
        }
    }
    let Some(len) = map.distance(from, to) else {
        return Err(PathError::Unreachable { from, to });
    };
    let mut cells = Vec::with_capacity(len as usize + 1);
    cells.push(from);
    let mut cur = from;
    while cur != to {
        cur = map.step_toward(cur, to);
        cells.push(cur);
    }
    Ok(Path { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{parse_map, Legend};

    fn open_room(n: usize) -> GridMap {
        let row = ".".repeat(n);
        let text = vec![row; n].join("\n");
        parse_map(&text, &Legend::new()).unwrap()
    }

    #[test]
    fn manhattan_in_open_room() {
        let map = open_room(10);
        let path = shortest_path(&map, Position::new(0, 0), Position::new(3, 4)).unwrap();
        assert_eq!(path.steps(), 7);
        assert_eq!(path.origin(), Position::new(0, 0));
        assert_eq!(path.destination(), Position::new(3, 4));
    }

    #[test]
    fn identity_path() {
        let map = open_room(4);
        let p = Position::new(2, 2);
        let path = shortest_path(&map, p, p).unwrap();
        assert_eq!(path.steps(), 0);
        assert_eq!(path.cells(), &[p]);
    }

    #[test]
    fn tie_break_prefers_up_then_right() {
        let map = open_room(3);
        let path = shortest_path(&map, Position::new(0, 2), Position::new(2, 0)).unwrap();
        assert_eq!(
            path.cells(),
            &[
                Position::new(0, 2),
                Position::new(0, 1),
                Position::new(0, 0),
                Position::new(1, 0),
                Position::new(2, 0),
            ]
        );
    }

    #[test]
    fn walls_and_unreachable() {
        let map = parse_map("..#..\n..#..", &Legend::new()).unwrap();
        let err = shortest_path(&map, Position::new(0, 0), Position::new(4, 0)).unwrap_err();
        assert!(matches!(err, PathError::Unreachable { .. }));
        let err = shortest_path(&map, Position::new(2, 0), Position::new(0, 0)).unwrap_err();
        assert_eq!(err, PathError::NotTraversable(Position::new(2, 0)));
    }

    #[test]
    fn path_cells_are_adjacent_and_open() {
        let map = parse_map(".....\n.###.\n...#.\n.#...", &Legend::new()).unwrap();
        let path = shortest_path(&map, Position::new(0, 3), Position::new(4, 0)).unwrap();
        for w in path.cells().windows(2) {
            assert_eq!(w[0].manhattan(w[1]), 1);
        }
        assert!(path.cells().iter().all(|&c| map.is_traversable(c)));
        assert_eq!(path.steps(), 7);
    }
}
