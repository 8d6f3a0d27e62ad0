fn main() {
    std::process::exit(om_diffusion::cli::run(std::env::args_os()));
}
