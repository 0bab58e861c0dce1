//! Holds the `acceptance` test target, which checks the generator and its
//! analytics end to end across `bigen-core` and `bigen`.
