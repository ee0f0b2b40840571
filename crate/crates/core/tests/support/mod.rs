pub mod degenerate;
pub mod oracle;
