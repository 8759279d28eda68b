//! Holds the `acceptance` test target, which prints one line per criterion
//! and exits non-zero if any of them fails. Run it with
//! `cargo test -p maxpoly-verify --test acceptance`.
