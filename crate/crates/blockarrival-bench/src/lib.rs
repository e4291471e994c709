// Bench-only package; see benches/hot_paths.rs.
