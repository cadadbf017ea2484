//! Output files: CSV with a `#` config preamble, and PGM.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use qfc_chaos::{RasterGrid, RasterJob};

/// 17 significant digits, round-trip exact.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Outputs {
    dir: PathBuf,
    preamble: String,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, preamble: String) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            preamble,
            written: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> anyhow::Result<BufWriter<File>> {
        if name.is_empty() || name.contains(['/', '\\']) || name == ".." {
            bail!("output name `{name}` must be a plain file name");
        }
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(path);
        Ok(BufWriter::new(f))
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = self.create(name)?;
        w.write_all(self.preamble.as_bytes())?;
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(header)?;
        for r in rows {
            c.write_record(&r)?;
        }
        c.flush()?;
        Ok(())
    }

    pub fn pgm(&mut self, name: &str, grid: &RasterGrid) -> anyhow::Result<()> {
        let mut w = self.create(name)?;
        let comments: Vec<String> = self.preamble.lines().map(|l| l.trim_start_matches("# ").to_string()).collect();
        grid.write_pgm_annotated(&mut w, &comments)?;
        w.flush()?;
        Ok(())
    }

    pub fn raster_csv(&mut self, name: &str, job: &RasterJob, grid: &RasterGrid) -> anyhow::Result<()> {
        let mut w = self.create(name)?;
        w.write_all(self.preamble.as_bytes())?;
        qfc_chaos::write_raster_csv(job, grid, &mut w)?;
        w.flush()?;
        Ok(())
    }
}
