//! Holds the `acceptance` test target, which checks the workspace against its
//! acceptance criteria and prints one PASS/FAIL line per criterion.
