//! Plain word operations shared by the reference evaluator and the automata.

use alloc::vec::Vec;

/// Resolves a possibly negative index against a word of length `len`.
pub fn resolve_index(i: i64, len: usize) -> i64 {
    if i < 0 {
        len as i64 + i
    } else {
        i
    }
}

/// `w[i..=j]` with negative indices counted from the end.
///
/// Returns the empty word whenever the resolved range is not inside the
/// word (`i > j`, `i < 0`, or `j >= |w|`).
pub fn slice<T>(w: &[T], i: i64, j: i64) -> &[T] {
    let i = resolve_index(i, w.len());
    let j = resolve_index(j, w.len());
    if i < 0 || i > j || j >= w.len() as i64 {
        return &[];
    }
    &w[i as usize..=j as usize]
}

/// Collapses every maximal run of equal letters into one letter.
pub fn stutter_reduce<T: PartialEq + Clone>(w: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(w.len());
    for x in w {
        if out.last() != Some(x) {
            out.push(x.clone());
        }
    }
    out
}

pub fn is_prefix<T: PartialEq>(prefix: &[T], w: &[T]) -> bool {
    prefix.len() <= w.len() && prefix == &w[..prefix.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_examples() {
        let w = b"abcde";
        assert_eq!(slice(w, 1, 3), b"bcd");
        assert_eq!(slice(w, -2, -1), b"de");
        assert_eq!(slice(w, 0, -1), b"abcde");
        assert_eq!(slice(w, 3, 1), b"");
        assert_eq!(slice(w, 2, 5), b"");
        assert_eq!(slice(w, -6, 1), b"");
        assert_eq!(slice(b"", 0, 0), b"");
    }

    #[test]
    fn stutter_examples() {
        assert_eq!(stutter_reduce(b"aabbbab"), b"abab".to_vec());
        assert_eq!(stutter_reduce::<u8>(b""), Vec::<u8>::new());
    }

    #[test]
    fn prefix_examples() {
        assert!(is_prefix(b"", b"ab"));
        assert!(is_prefix(b"ab", b"ab"));
        assert!(!is_prefix(b"abc", b"ab"));
        assert!(!is_prefix(b"b", b"ab"));
    }
}
