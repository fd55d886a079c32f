#pragma once

#include <filesystem>

#include "numta/training/trainer.hpp"

namespace numta {

/// Header `epoch,train_loss,train_acc,test_loss,test_acc`, one row per epoch from 1.
/// Values carry 17 significant digits, so a read returns the identical history.
void write_history_csv(const std::filesystem::path& path, const EpochHistory& history);
/// Throws IoError / DataError.
EpochHistory read_history_csv(const std::filesystem::path& path);

}  // namespace numta
