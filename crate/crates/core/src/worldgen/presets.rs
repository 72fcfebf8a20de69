//! Built-in example maps in the symbolic format
//! (`.` Floor0, `:` Floor1, `>` StairX, `^` StairY, `#` Obstacle).

use super::{build_tile_catalog, ExampleMap, TileCatalog, TileMap, WorldgenError};

pub const ROOMS: &str = "\
################
#......#.......#
#......#.......#
#..............#
#......#.......#
####.#####.#####
#......#.......#
#......#.......#
#..............#
#......#.......#
################";

pub const TERRACES: &str = "\
###############
#.....#:::::::#
#.....>:::::::#
#.....#:::::::#
#.....#:::#####
#.....#:::>...#
###.###:::#...#
#.....#:::#...#
#.....>:::>...#
#.....#:::#...#
###############";

pub const CORRIDORS: &str = "\
##############
#............#
#.##########.#
#.#........#.#
#.#.######.#.#
#...#....#...#
#####.##.#####
#...........##
##############";

pub const MIXED: &str = "\
###############
#.....#.......#
#.....#.......#
#.....#.......#
###^#####.#####
#:::::#.......#
#:::::>.......#
#:::::#.......#
#:::::####^####
#:::::::::::::#
###############";

/// Mostly open floor; few constraints, used for frequency checks.
pub const OPEN: &str = "\
..........
...#......
..........
......:::.
......:::.
..#.......
..........";

pub const ALL: [(&str, &str); 5] =
    [("rooms", ROOMS), ("terraces", TERRACES), ("corridors", CORRIDORS), ("mixed", MIXED), ("open", OPEN)];

pub fn example(name: &str) -> Option<ExampleMap> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| ExampleMap::parse_symbols(s).expect("preset parses"))
}

pub fn catalog(name: &str, pattern_size: usize) -> Result<TileCatalog, WorldgenError> {
    let ex = example(name).ok_or_else(|| WorldgenError::Parse(format!("unknown preset {name:?}")))?;
    build_tile_catalog(&ex, pattern_size)
}

/// A single straight floor lane between two wall rows.
pub const STRAIGHT: &str = "\
######
......
######";

/// A straight corridor `length` tiles long (three tiles tall, walls above and
/// below) together with a catalog that admits it.
pub fn straight_corridor(length: usize, seed: u64) -> (TileMap, TileCatalog) {
    let ex = ExampleMap::parse_symbols(STRAIGHT).expect("preset parses");
    let catalog = build_tile_catalog(&ex, 2).expect("valid preset");
    let mut cells = vec![4; 3 * length];
    cells[length..2 * length].fill(0);
    (TileMap::new(length, 3, cells, seed).expect("non-empty corridor"), catalog)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_have_no_dead_kinds() {
        for (name, _) in ALL {
            let cat = catalog(name, 2).unwrap();
            assert!(cat.dead_kinds().is_empty(), "{name}");
        }
    }

    #[test]
    fn straight_corridor_is_legal() {
        let (map, cat) = straight_corridor(9, 1);
        assert!(super::super::validate_adjacency(&map, &cat).unwrap().is_empty());
    }
}
