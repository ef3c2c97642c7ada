pub mod gen;
pub mod oracle;
