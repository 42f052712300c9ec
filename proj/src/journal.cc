#include "hsense/journal.h"

#include <filesystem>

#include "absl/status/status.h"
#include "hsense/strings.h"

namespace hsense {

absl::StatusOr<std::unique_ptr<Journal>> Journal::Open(const std::string& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) return absl::UnavailableError("cannot open journal " + path);
  return std::unique_ptr<Journal>(new Journal(std::move(out)));
}

absl::StatusOr<std::vector<std::vector<std::string>>> Journal::ReadRecords(
    const std::string& path) {
  std::vector<std::vector<std::string>> records;
  if (!std::filesystem::exists(path)) return records;
  std::ifstream in(path);
  if (!in) return absl::UnavailableError("cannot read journal " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(Split(line, '|'));
  }
  return records;
}

absl::Status Journal::Append(const std::vector<std::string_view>& fields) {
  std::lock_guard<std::mutex> lock(mu_);
  out_ << Join(fields, '|') << '\n';
  out_.flush();
  if (!out_) return absl::DataLossError("journal write failed");
  return absl::OkStatus();
}

}  // namespace hsense
