fn main() {
    // Elaboration and staging recurse over user syntax, so give the
    // worker a roomy stack instead of relying on the platform default.
    let worker = std::thread::Builder::new()
        .name("stagec".to_string())
        .stack_size(64 * 1024 * 1024)
        .spawn(stagec::cli::run)
        .expect("failed to spawn worker thread");
    let code = worker.join().unwrap_or(101);
    std::process::exit(code);
}
