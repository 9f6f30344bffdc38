//! Crate docs
/// Doc comment
pub fn add(a: i32, b: i32) -> i32 {
    a + b
}

/* block
   comment */
pub const S: &str = r#"a "quoted" // x"#;
pub const T: &str = "multi
line";
