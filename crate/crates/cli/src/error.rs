use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] holonomic_optics::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot encode output: {0}")]
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(holonomic_optics::Error::Convergence { .. }) => 3,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let conv = holonomic_optics::Error::Convergence {
            what: "x".into(),
            change: 1.0,
            tolerance: 0.1,
        };
        assert_eq!(CliError::from(conv).exit_code(), 3);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
    }
}
