//! `simulmt`: train, decode, stream-decode, tune, evaluate and generate data.

mod args;
mod commands;
mod io;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => commands::train(a),
        Command::Decode(a) => commands::decode(a),
        Command::StreamDecode(a) => commands::stream_decode(a),
        Command::Tune(a) => commands::tune(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::GenChunks(a) => commands::gen_chunks(a),
        Command::GenAddm(a) => commands::gen_addm(a),
        Command::GenSynth(a) => commands::gen_synth(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
