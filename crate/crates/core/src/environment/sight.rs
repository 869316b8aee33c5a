use super::{GridMap, Position};

/// Every cell touched by the segment between the centers of `from` and `to`,
/// in order. Where the segment passes exactly through a cell corner both side
/// cells are included, so a ray cannot slip between two diagonal walls.
pub fn ray_cells(from: Position, to: Position) -> Vec<Position> {
    let (x0, y0) = (i64::from(from.x), i64::from(from.y));
    let (x1, y1) = (i64::from(to.x), i64::from(to.y));
    let (nx, ny) = ((x1 - x0).abs(), (y1 - y0).abs());
    let (sx, sy) = ((x1 - x0).signum(), (y1 - y0).signum());

    let mut cells = Vec::with_capacity((nx + ny + 1) as usize);
    let (mut x, mut y) = (x0, y0);
    let at = |x: i64, y: i64| Position::new(x as u32, y as u32);
    cells.push(at(x, y));
    let (mut ix, mut iy) = (0, 0);
    while ix < nx || iy < ny {
        // Compare when the ray crosses the next vertical vs horizontal cell edge.
        let vertical = (1 + 2 * ix) * ny;
        let horizontal = (1 + 2 * iy) * nx;
        if vertical == horizontal {
            cells.push(at(x + sx, y));
            cells.push(at(x, y + sy));
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if vertical < horizontal {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        cells.push(at(x, y));
    }
    cells
}

/// True when `to` is within `radius` (Euclidean, in cells) of `from` and no
/// wall lies on the ray between them.
pub fn line_of_sight(map: &GridMap, from: Position, to: Position, radius: f64) -> bool {
    let dx = f64::from(from.x) - f64::from(to.x);
    let dy = f64::from(from.y) - f64::from(to.y);
    if dx * dx + dy * dy > radius * radius {
        return false;
    }
    ray_cells(from, to).into_iter().all(|c| map.is_traversable(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{parse_map, Legend};

    fn map(text: &str) -> GridMap {
        parse_map(text, &Legend::new()).unwrap()
    }

    #[test]
    fn adjacent_cells_visible() {
        let m = map("...\n...");
        assert!(line_of_sight(&m, Position::new(0, 0), Position::new(1, 0), 5.0));
        assert!(line_of_sight(&m, Position::new(0, 0), Position::new(0, 1), 5.0));
    }

    #[test]
    fn range_cutoff() {
        let m = map(&".".repeat(12));
        assert!(!line_of_sight(&m, Position::new(0, 0), Position::new(10, 0), 5.0));
        assert!(line_of_sight(&m, Position::new(0, 0), Position::new(5, 0), 5.0));
    }

    #[test]
    fn wall_in_corridor_blocks() {
        let m = map("..#..");
        let cells = ray_cells(Position::new(0, 0), Position::new(4, 0));
        assert!(cells.contains(&Position::new(2, 0)));
        assert!(!line_of_sight(&m, Position::new(0, 0), Position::new(4, 0), 5.0));
    }

    #[test]
    fn corner_grazing_is_blocked() {
        // the diagonal passes exactly between the two walls
        let m = map(".#\n#.");
        assert!(!line_of_sight(&m, Position::new(0, 0), Position::new(1, 1), 5.0));
        let open = map("..\n..");
        assert!(line_of_sight(&open, Position::new(0, 0), Position::new(1, 1), 5.0));
    }

    #[test]
    fn self_visibility() {
        let m = map("..");
        assert!(line_of_sight(&m, Position::new(1, 0), Position::new(1, 0), 0.0));
    }

    #[test]
    fn ray_is_reversible_as_a_set() {
        let a = Position::new(1, 7);
        let b = Position::new(9, 2);
        let mut fwd = ray_cells(a, b);
        let mut back = ray_cells(b, a);
        fwd.sort();
        back.sort();
        assert_eq!(fwd, back);
    }
}
