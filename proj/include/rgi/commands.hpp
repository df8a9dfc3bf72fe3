#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rgi/config.hpp"
#include "rgi/corruption.hpp"

namespace rgi {

struct CommandIo {
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed_override;
    bool full = false;  // raises simulate sample counts to the full preset
};

void cmd_make_fixture(ExperimentConfig config, const CommandIo& io);
void cmd_train_decoder(ExperimentConfig config, const CommandIo& io);
void cmd_solve(const std::string& method, ExperimentConfig config, const CommandIo& io);
void cmd_sweep(ExperimentConfig config, const CommandIo& io);
int cmd_verify(ExperimentConfig config, const CommandIo& io);  // 0 iff both theorems PASS
void cmd_simulate(ExperimentConfig config, const CommandIo& io);
void cmd_metrics(ExperimentConfig config, const CommandIo& io);

// Fixture directory layout shared by make-fixture and the solve/verify readers.
CorruptedSample load_fixture_dir(const std::filesystem::path& dir);

}  // namespace rgi
