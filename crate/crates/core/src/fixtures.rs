//! Bundled example maps and specifications.

pub const HALLWAY_MAP: &str = include_str!("../fixtures/hallway.map");
pub const HOSPITAL_MAP: &str = include_str!("../fixtures/hospital.map");
pub const HOUSE_MAP: &str = include_str!("../fixtures/house.map");

pub const HALLWAY_LIVELOCK: &str = include_str!("../fixtures/hallway_livelock.spec");
pub const KITCHEN_DEADLOCK: &str = include_str!("../fixtures/kitchen_deadlock.spec");
pub const HOSPITAL_PATROL: &str = include_str!("../fixtures/hospital_patrol.spec");
pub const HALLWAY_DEADLOCK: &str = include_str!("../fixtures/hallway_deadlock.spec");
pub const FOLLOW_ME: &str = include_str!("../fixtures/follow_me.spec");
pub const HOUSE_DEADLOCK: &str = include_str!("../fixtures/house_deadlock.spec");
pub const HOUSE_LIVELOCK: &str = include_str!("../fixtures/house_livelock.spec");

pub const ALL: [(&str, &str); 7] = [
    ("hallway_livelock", HALLWAY_LIVELOCK),
    ("kitchen_deadlock", KITCHEN_DEADLOCK),
    ("hospital_patrol", HOSPITAL_PATROL),
    ("hallway_deadlock", HALLWAY_DEADLOCK),
    ("follow_me", FOLLOW_ME),
    ("house_deadlock", HOUSE_DEADLOCK),
    ("house_livelock", HOUSE_LIVELOCK),
];

pub const MAPS: [(&str, &str); 3] = [
    ("hallway", HALLWAY_MAP),
    ("hospital", HOSPITAL_MAP),
    ("house", HOUSE_MAP),
];

pub fn spec(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn map(name: &str) -> Option<&'static str> {
    MAPS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
