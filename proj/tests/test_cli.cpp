#include <doctest.h>

#include <cstdlib>
#include <string>

#include <sys/wait.h>

#include "helpers.hpp"

// Subprocess smoke tests against the installed CLI binary. The build passes
// the binary location in TTREE_CLI_PATH.

namespace {

struct RunOutcome {
    int exit_code = -1;
    std::string output;   // stdout + stderr
};

RunOutcome run_cli(const std::string& args, const std::string& capture_path) {
    const std::string command =
        std::string(TTREE_CLI_PATH) + " " + args + " > " + capture_path + " 2>&1";
    const int status = std::system(command.c_str());
    RunOutcome outcome;
    outcome.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    outcome.output = testutil::read_file(capture_path);
    return outcome;
}

} // namespace

TEST_CASE("help and usage errors") {
    testutil::ScratchDir dir("cli-usage");
    const std::string log = dir.file("log.txt");

    CHECK(run_cli("--help", log).exit_code == 0);
    CHECK(run_cli("train --help", log).exit_code == 0);

    CHECK(run_cli("", log).exit_code == 2);                    // verb required
    CHECK(run_cli("frobnicate", log).exit_code == 2);          // unknown verb
    CHECK(run_cli("train --no-such-flag 1", log).exit_code == 2);

    RunOutcome missing = run_cli("train --data /nonexistent/x.csv", log);
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("error:") != std::string::npos);

    // Bad config value surfaces as a usage error with the offending key.
    RunOutcome bad = run_cli("train --synthetic default --lambda banana", log);
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("lambda") != std::string::npos);
}

TEST_CASE("full pipeline: generate, train, prune, predict, evaluate, export") {
    testutil::ScratchDir dir("cli-pipeline");
    const std::string log = dir.file("log.txt");
    const std::string common = " --synthetic default --samples 500 --seed 11"
                               " --criterion learn --min-group-size 10 --max-depth 3";

    RunOutcome gen = run_cli("generate --synthetic default --samples 120 --seed 11 --out " +
                                 dir.file("data.csv"),
                             log);
    CHECK(gen.exit_code == 0);
    CHECK(gen.output.find("generated 120 samples") != std::string::npos);

    RunOutcome train = run_cli("train" + common + " --out " + dir.file("tree.json"), log);
    CHECK(train.exit_code == 0);
    CHECK(train.output.find("nodes = ") != std::string::npos);

    RunOutcome prune = run_cli("prune" + common + " --tree " + dir.file("tree.json") +
                                   " --alpha 0.05 --out " + dir.file("pruned.json"),
                               log);
    CHECK(prune.exit_code == 0);
    CHECK(prune.output.find("leaves_after = ") != std::string::npos);

    RunOutcome predict = run_cli("predict --tree " + dir.file("pruned.json") + " --data " +
                                     dir.file("data.csv") + " --out " + dir.file("scored.csv"),
                                 log);
    CHECK(predict.exit_code == 0);
    const std::string scored = testutil::read_file(dir.file("scored.csv"));
    CHECK(scored.find("predicted_effect") != std::string::npos);
    CHECK(scored.find("prescribed_trigger") != std::string::npos);

    RunOutcome evaluate = run_cli("evaluate" + common + " --tree " + dir.file("tree.json") +
                                      " --test-fraction 0.3",
                                  log);
    CHECK(evaluate.exit_code == 0);
    CHECK(evaluate.output.find("ace_error = ") != std::string::npos);

    RunOutcome dot = run_cli("export-dot --tree " + dir.file("tree.json"), log);
    CHECK(dot.exit_code == 0);
    CHECK(dot.output.find("digraph") != std::string::npos);
}

TEST_CASE("config file plus flag overrides, flags win") {
    testutil::ScratchDir dir("cli-config");
    const std::string log = dir.file("log.txt");
    testutil::write_file(dir.file("run.cfg"),
                         "synthetic = default\n"
                         "samples = 200\n"
                         "seed = 3\n"
                         "criterion = learn\n"
                         "min_group_size = 10\n");

    RunOutcome from_file =
        run_cli("generate --config " + dir.file("run.cfg") + " --out " + dir.file("a.csv"), log);
    CHECK(from_file.exit_code == 0);
    CHECK(from_file.output.find("generated 200 samples") != std::string::npos);

    RunOutcome overridden = run_cli("generate --config " + dir.file("run.cfg") +
                                        " --samples 50 --out " + dir.file("b.csv"),
                                    log);
    CHECK(overridden.exit_code == 0);
    CHECK(overridden.output.find("generated 50 samples") != std::string::npos);
}

TEST_CASE("identical seeds produce byte-identical tree files") {
    testutil::ScratchDir dir("cli-determinism");
    const std::string log = dir.file("log.txt");
    const std::string args = "train --synthetic default --samples 300 --seed 21"
                             " --criterion learn --min-group-size 10 --out ";

    CHECK(run_cli(args + dir.file("a.json"), log).exit_code == 0);
    CHECK(run_cli(args + dir.file("b.json"), log).exit_code == 0);
    const std::string a = testutil::read_file(dir.file("a.json"));
    const std::string b = testutil::read_file(dir.file("b.json"));
    REQUIRE(!a.empty());
    CHECK(a == b);

    CHECK(run_cli("train --synthetic default --samples 300 --seed 22"
                  " --criterion learn --min-group-size 10 --out " +
                      dir.file("c.json"),
                  log)
              .exit_code == 0);
    CHECK(testutil::read_file(dir.file("c.json")) != a);
}
