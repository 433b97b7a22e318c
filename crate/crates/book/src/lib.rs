//! Placeholder; populated when the book chapters land.
