//! Semantic class vocabulary shared by masks, maps and confusion matrices.

/// Number of unified semantic classes used by default.
pub const DEFAULT_NUM_CLASSES: usize = 8;

/// Label value reserved for pixels and points that carry no class.
pub const IGNORE: u8 = 255;

/// The eight unified aerial classes, in id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SemanticClass {
    Animal = 0,
    Building = 1,
    ImperviousSurface = 2,
    PerviousSurface = 3,
    TreeVegetation = 4,
    LowVegetation = 5,
    Water = 6,
    Vehicle = 7,
}

impl SemanticClass {
    pub const ALL: [SemanticClass; DEFAULT_NUM_CLASSES] = [
        SemanticClass::Animal,
        SemanticClass::Building,
        SemanticClass::ImperviousSurface,
        SemanticClass::PerviousSurface,
        SemanticClass::TreeVegetation,
        SemanticClass::LowVegetation,
        SemanticClass::Water,
        SemanticClass::Vehicle,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticClass::Animal => "Animal",
            SemanticClass::Building => "Building",
            SemanticClass::ImperviousSurface => "ImperviousSurface",
            SemanticClass::PerviousSurface => "PerviousSurface",
            SemanticClass::TreeVegetation => "TreeVegetation",
            SemanticClass::LowVegetation => "LowVegetation",
            SemanticClass::Water => "Water",
            SemanticClass::Vehicle => "Vehicle",
        }
    }

    /// Display colour used for coloured clouds and plots.
    pub fn color(self) -> [u8; 3] {
        match self {
            SemanticClass::Animal => [200, 120, 200],
            SemanticClass::Building => [230, 210, 40],
            SemanticClass::ImperviousSurface => [128, 128, 128],
            SemanticClass::PerviousSurface => [140, 90, 50],
            SemanticClass::TreeVegetation => [20, 100, 30],
            SemanticClass::LowVegetation => [120, 200, 90],
            SemanticClass::Water => [40, 90, 220],
            SemanticClass::Vehicle => [220, 30, 30],
        }
    }
}

/// Human-readable name for a class id under a vocabulary of `num_classes`.
pub fn class_name(id: u8, num_classes: usize) -> String {
    if id == IGNORE {
        return "Ignore".to_string();
    }
    if num_classes == DEFAULT_NUM_CLASSES {
        if let Some(c) = SemanticClass::from_id(id) {
            return c.name().to_string();
        }
    }
    format!("class{id}")
}

/// Inverse of [`class_name`]; accepts either a known name or a bare integer.
pub fn parse_class(token: &str, num_classes: usize) -> Option<u8> {
    let token = token.trim();
    if let Ok(id) = token.parse::<u8>() {
        return ((id as usize) < num_classes || id == IGNORE).then_some(id);
    }
    (0..num_classes as u8).find(|&id| class_name(id, num_classes) == token)
}

/// Index of the largest count; ties go to the lowest class id.
/// Returns `None` when every count is zero.
pub fn majority(counts: &[u32]) -> Option<u8> {
    let mut best: Option<(u8, u32)> = None;
    for (id, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        match best {
            Some((_, bc)) if bc >= c => {}
            _ => best = Some((id as u8, c)),
        }
    }
    best.map(|(id, _)| id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_prefers_lowest_id_on_ties() {
        assert_eq!(majority(&[0, 2, 1]), Some(1));
        assert_eq!(majority(&[0, 1, 1]), Some(1));
        assert_eq!(majority(&[3, 0, 3]), Some(0));
        assert_eq!(majority(&[0, 0, 0]), None);
    }

    #[test]
    fn names_round_trip() {
        for c in SemanticClass::ALL {
            assert_eq!(parse_class(c.name(), 8), Some(c.id()));
        }
        assert_eq!(parse_class("3", 8), Some(3));
        assert_eq!(parse_class("9", 8), None);
        assert_eq!(class_name(2, 4), "class2");
    }
}
