#ifndef HSENSE_JOURNAL_H_
#define HSENSE_JOURNAL_H_

#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace hsense {

// Append-only file of '|'-separated records, one per line, flushed per write.
class Journal {
 public:
  static absl::StatusOr<std::unique_ptr<Journal>> Open(const std::string& path);
  // Missing file reads as empty.
  static absl::StatusOr<std::vector<std::vector<std::string>>> ReadRecords(
      const std::string& path);

  absl::Status Append(const std::vector<std::string_view>& fields);

 private:
  explicit Journal(std::ofstream out) : out_(std::move(out)) {}

  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace hsense

#endif  // HSENSE_JOURNAL_H_
