#ifndef CERTLOOP_ARCHIVE_HPP
#define CERTLOOP_ARCHIVE_HPP

#include <string>
#include <vector>

#include "certloop/mape.hpp"

namespace certloop {

/// On-disk layout of a scenario run:
///
///   <dir>/run.kv              manifest echo (application, paths, weights, ...)
///   <dir>/decisions.log       one tab-separated line per loop record
///   <dir>/evidence/NNNN.csv   batch verification results per analysed decision
///   <dir>/arguments/NNNN.dot  assurance argument (graph rendering)
///   <dir>/arguments/NNNN.txt  assurance argument (parseable outline)
///   <dir>/design_report.txt   controller verification report (design evidence)
///   <dir>/trace.csv           controlled-system ground truth over time
///   <dir>/timing.csv          wall-clock measurements (the only
///                             non-reproducible file, kept apart on purpose)
class ArchiveWriter {
 public:
  explicit ArchiveWriter(std::string dir);

  void write_manifest(const KvNode& manifest);
  void write_design_report(const std::string& report_text);
  void on_record(const LoopRecord& record, const ConfigurationSpace* space,
                 const BatchOutcome* batch, const GsnArgument* argument);
  void write_trace(const std::string& csv);
  void finalize();

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<LoopRecord> records_;
};

struct ArchiveRecord {
  int seq = 0;
  double timestamp = 0.0;
  std::string event;
  std::string decision;
  std::string target_summary;
  std::string evidence_digest;
  int argument_version = -1;
  std::size_t feasible_count = 0;
  std::string reason;
};

struct ArchiveData {
  std::string dir;
  std::vector<ArchiveRecord> records;
  KvNode manifest;
};

/// Throws CorruptArchive when the structure is unreadable or empty.
ArchiveData read_archive(const std::string& dir);

struct AuditReport {
  bool ok = true;
  std::vector<std::string> problems;
  std::string summary_text;  // human-readable decision table
};

/// Referential-completeness audit: every analysed decision has its evidence
/// CSV and argument files, every argument validates with zero uninstantiated
/// nodes, its context names the decision target, and every evidence digest
/// re-derives from the archived evidence.
AuditReport audit_archive(const std::string& dir);

}  // namespace certloop

#endif
