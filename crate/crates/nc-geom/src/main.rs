use std::process::ExitCode;

fn main() -> ExitCode {
    // Rust ignores SIGPIPE by default, turning `nc-geom ... | head` into a
    // broken-pipe panic. Restore the usual unix behavior: die quietly.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    nc_geom::cli::run()
}
