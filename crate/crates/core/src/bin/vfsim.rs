fn main() {
    std::process::exit(vfsim_core::cli::cli_main(std::env::args_os()));
}
