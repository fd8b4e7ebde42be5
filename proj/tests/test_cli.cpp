#include "doctest.h"

#include "inptpu/config.hpp"
#include "inptpu/image_io.hpp"
#include "scratch_dir.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sys/wait.h>

namespace fs = std::filesystem;
using inptpu::config::Json;

namespace {

// Shared workspace: a small dataset and tiny checkpoints built on first use.
ScratchDir& work() {
  static ScratchDir dir("cli");
  return dir;
}

int run(const std::string& args, const std::string& log = "cli.log") {
  const std::string cmd = std::string(INPTPU_CLI) + " " + args + " > " + (work().path / log).string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

fs::path data() { return work().path / "data"; }

void write_tiny_config() {
  std::ofstream(work().path / "tiny.json")
      << R"({"model": {"depth": 1, "dim": 24, "heads": 2}, "train": {"batch": 1, "checkpoint_every": 5}})";
}

}  // namespace

TEST_CASE("synth writes a reproducible dataset") {
  REQUIRE(run("synth --n 4 --frames 10 --seed 3 --out " + data().string()) == 0);
  CHECK(fs::exists(data() / "manifest.json"));
  CHECK(Json::parse(slurp(data() / "manifest.json"))["records"].size() == 4);
  const fs::path again = work().path / "data2";
  REQUIRE(run("synth --n 4 --frames 10 --seed 3 --out " + again.string()) == 0);
  for (const auto& e : fs::recursive_directory_iterator(data())) {
    if (e.is_regular_file()) CHECK(slurp(e.path()) == slurp(again / fs::relative(e.path(), data())));
  }
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("synth --n 1 --out " + (work().path / "bad").string()) == 2);
  CHECK(run("train --stage keyframe --data " + (work().path / "nowhere").string()) == 2);
  CHECK(run("train --stage sideways --data " + data().string()) == 2);
  CHECK(run("eval --run " + (work().path / "nowhere").string() + " --gt " + data().string()) == 2);
  CHECK(run("synth --no-such-flag") == 2);
  CHECK(run("reenact --data " + data().string()) == 2);
  std::ofstream(work().path / "unknown.json") << R"({"train": {"learning_rate": 1}})";
  CHECK(run("train --stage keyframe --data " + data().string() + " --config " + (work().path / "unknown.json").string()) == 2);
  CHECK(run("--help") == 0);
  CHECK(run("train --help") == 0);
}

TEST_CASE("train smoke run writes one loss row per step and resumes exactly") {
  write_tiny_config();
  const std::string common = " --data " + data().string() + " --config " + (work().path / "tiny.json").string();
  REQUIRE(run("train --stage keyframe --steps 10 --out " + (work().path / "kf").string() + common) == 0);
  CHECK(count_lines(work().path / "kf" / "loss.csv") == 10 + 1);
  REQUIRE(run("train --stage video --steps 10 --out " + (work().path / "vid").string() + common) == 0);

  // 10 then 20 steps against a straight 20-step run.
  REQUIRE(run("train --stage video --steps 20 --out " + (work().path / "vid20").string() + common) == 0);
  fs::copy(work().path / "vid", work().path / "vid_resume", fs::copy_options::recursive);
  REQUIRE(run("train --stage video --steps 20 --resume --out " + (work().path / "vid_resume").string() + common) == 0);
  CHECK(slurp(work().path / "vid_resume" / "loss.csv") == slurp(work().path / "vid20" / "loss.csv"));
  CHECK(slurp(work().path / "vid_resume" / "params.bin") == slurp(work().path / "vid20" / "params.bin"));
}

TEST_CASE("reenact writes frames, chains clips and checks cross coverage") {
  const std::string ckpt =
      " --ckpt-img " + (work().path / "kf").string() + " --ckpt-vid " + (work().path / "vid").string() + " --sampler-steps 2";
  const fs::path self = work().path / "self";
  REQUIRE(run("reenact --data " + data().string() + " --split test --clip-length 10" + ckpt + " --out " + self.string()) == 0);
  CHECK(inptpu::image_io::count_frames(self / "clip_0000" / "frames") == 10);
  CHECK(fs::exists(self / "clip_0000" / "job.json"));

  const fs::path chain = work().path / "chain";
  REQUIRE(run("reenact --data " + data().string() + " --split test --max-clips 1 --clip-length 4 --clips 3" + ckpt +
              " --out " + chain.string()) == 0);
  CHECK(inptpu::image_io::count_frames(chain / "clip_0000" / "frames") == 10);

  const fs::path cross = work().path / "cross";
  REQUIRE(run("reenact --mode cross --data " + data().string() + " --split test --clip-length 10" + ckpt + " --out " +
              cross.string()) == 0);
  CHECK(inptpu::image_io::count_frames(cross / "clip_0000" / "frames") == 10);

  // Same seed, same bytes.
  const fs::path again = work().path / "self_again";
  REQUIRE(run("reenact --data " + data().string() + " --split test --clip-length 10" + ckpt + " --out " + again.string()) == 0);
  CHECK(slurp(self / "clip_0000" / "frames" / "00005.png") == slurp(again / "clip_0000" / "frames" / "00005.png"));

  // Explicit inputs.
  const fs::path clip = data() / "test" / "clip_0000";
  const fs::path one = work().path / "one";
  REQUIRE(run("reenact --source " + (clip / "frames").string() + " --mask " + (clip / "masks").string() + " --reference " +
              (clip / "reference.png").string() + " --clip-length 10" + ckpt + " --out " + one.string()) == 0);
  CHECK(inptpu::image_io::count_frames(one / "frames") == 10);
}

TEST_CASE("eval writes a report and the ablation table") {
  const fs::path self = work().path / "self";
  REQUIRE(run("eval --run " + self.string() + " --data " + data().string() + " --split test") == 0);
  const Json report = Json::parse(slurp(self / "report.json"));
  for (const char* key : {"psnr", "subject_consistency", "motion_smoothness"}) CHECK(report.contains(key));

  const fs::path abl = work().path / "ablate";
  REQUIRE(run("eval --ablate --data " + data().string() + " --split test --sampler-steps 2 --ckpt-img " +
              (work().path / "kf").string() + " --ckpt-vid " + (work().path / "vid").string() + " --out " + abl.string()) == 0);
  const Json table = Json::parse(slurp(abl / "ablation.json"));
  CHECK(table["arms"].size() == 3);
}
