pub mod integrate;
pub mod report;
pub mod simulate;
pub mod verify;
