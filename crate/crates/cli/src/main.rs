use std::io::Write;

fn main() {
    let r = ccx::run(std::env::args_os(), &mut std::io::stdin().lock());
    print!("{}", r.stdout);
    eprint!("{}", r.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(r.code);
}
