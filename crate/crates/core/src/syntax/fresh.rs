//! Fresh-name generation. Generated names carry a `$` prefix, which the
//! surface lexer never produces, so they cannot collide with user names.

use std::sync::atomic::{AtomicUsize, Ordering};

static GLOBAL: AtomicUsize = AtomicUsize::new(0);

fn stem(hint: &str) -> &str {
    let h = hint.trim_start_matches('$');
    let h = h.trim_end_matches(|c: char| c.is_ascii_digit() || c == '!');
    if h.is_empty() || h == "ν" {
        "v"
    } else {
        h
    }
}

/// Per-session generator; numbering is deterministic so that dumped queries
/// are reproducible.
#[derive(Debug, Default, Clone)]
pub struct Fresh {
    next: usize,
}

impl Fresh {
    pub fn new() -> Self {
        Fresh::default()
    }

    pub fn name(&mut self, hint: &str) -> String {
        self.next += 1;
        format!("${}{}", stem(hint), self.next)
    }
}

/// Process-wide generator used for capture avoidance inside substitution,
/// where threading a session generator through would be awkward.
pub fn global_fresh(hint: &str) -> String {
    let n = GLOBAL.fetch_add(1, Ordering::Relaxed);
    format!("${}!{}", stem(hint), n)
}

pub fn is_generated(name: &str) -> bool {
    name.starts_with('$')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn session_names_are_sequential_and_prefixed() {
        let mut f = Fresh::new();
        assert_eq!(f.name("x"), "$x1");
        assert_eq!(f.name("$x1"), "$x2");
        assert_eq!(f.name("ν"), "$v3");
    }

    #[test]
    fn global_names_never_repeat() {
        let a = global_fresh("y");
        let b = global_fresh("y");
        assert_ne!(a, b);
        assert!(is_generated(&a));
    }
}
