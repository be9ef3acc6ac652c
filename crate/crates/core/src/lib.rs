pub mod abr;
pub mod fgn;
pub mod harness;
pub mod sim;
pub mod switch;
pub mod tcp;
pub mod vbr;
