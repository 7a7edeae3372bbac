#include "certloop/archive.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "certloop/errors.hpp"
#include "certloop/gsn.hpp"
#include "certloop/util.hpp"

namespace fs = std::filesystem;

namespace certloop {

namespace {

std::string seq_name(int seq) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", seq);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) { return split(line, ','); }

}  // namespace

ArchiveWriter::ArchiveWriter(std::string dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  fs::create_directories(dir_ + "/evidence");
  fs::create_directories(dir_ + "/arguments");
}

void ArchiveWriter::write_manifest(const KvNode& manifest) {
  KvNode root;
  root.is_block = true;
  root.children.push_back(manifest);
  write_file(dir_ + "/run.kv", kv_serialize(root));
}

void ArchiveWriter::write_design_report(const std::string& report_text) {
  write_file(dir_ + "/design_report.txt", report_text);
}

void ArchiveWriter::on_record(const LoopRecord& record, const ConfigurationSpace* space,
                              const BatchOutcome* batch, const GsnArgument* argument) {
  records_.push_back(record);
  if (space && batch)
    write_file(dir_ + "/evidence/" + seq_name(record.seq) + ".csv",
               batch_csv_text(*space, *batch));
  if (argument) {
    write_file(dir_ + "/arguments/" + seq_name(record.seq) + ".dot", render(*argument, "dot"));
    write_file(dir_ + "/arguments/" + seq_name(record.seq) + ".txt",
               render(*argument, "text-outline"));
  }
}

void ArchiveWriter::write_trace(const std::string& csv) {
  write_file(dir_ + "/trace.csv", csv);
}

void ArchiveWriter::finalize() {
  std::ostringstream log;
  for (const auto& r : records_) {
    log << r.seq << '\t' << format_double(r.timestamp) << '\t' << r.event_summary << '\t'
        << r.decision << '\t' << r.target.summary() << '\t' << r.evidence_digest << '\t'
        << r.argument_version << '\t' << r.feasible_count << '\t' << r.failsafe_reason << '\n';
  }
  write_file(dir_ + "/decisions.log", log.str());

  std::ostringstream timing;
  timing << "seq,analysis_seconds\n";
  for (const auto& r : records_)
    timing << r.seq << ',' << format_double(r.analysis_seconds) << '\n';
  write_file(dir_ + "/timing.csv", timing.str());
}

ArchiveData read_archive(const std::string& dir) {
  ArchiveData data;
  data.dir = dir;
  if (!fs::exists(dir + "/decisions.log")) throw CorruptArchive("missing decisions.log in " + dir);
  std::istringstream in(read_file(dir + "/decisions.log"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto parts = split(line, '\t');
    if (parts.size() != 9) throw CorruptArchive("malformed decisions.log line: " + line);
    ArchiveRecord r;
    r.seq = std::stoi(parts[0]);
    r.timestamp = std::stod(parts[1]);
    r.event = parts[2];
    r.decision = parts[3];
    r.target_summary = parts[4];
    r.evidence_digest = parts[5];
    r.argument_version = std::stoi(parts[6]);
    r.feasible_count = static_cast<std::size_t>(std::stoul(parts[7]));
    r.reason = parts[8];
    data.records.push_back(std::move(r));
  }
  if (data.records.empty()) throw CorruptArchive("decisions.log is empty");
  if (fs::exists(dir + "/run.kv")) {
    KvNode doc = kv_parse(read_file(dir + "/run.kv"));
    if (const KvNode* run = doc.find("run")) data.manifest = *run;
  }
  return data;
}

namespace {

struct EvidenceCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string raw;
};

EvidenceCsv load_evidence_csv(const std::string& path) {
  EvidenceCsv csv;
  csv.raw = read_file(path);
  std::istringstream in(csv.raw);
  std::string line;
  if (std::getline(in, line)) csv.header = split_csv_line(line);
  while (std::getline(in, line))
    if (!line.empty()) csv.rows.push_back(split_csv_line(line));
  return csv;
}

}  // namespace

AuditReport audit_archive(const std::string& dir) {
  AuditReport report;
  auto flag = [&](std::string s) {
    report.ok = false;
    report.problems.push_back(std::move(s));
  };

  ArchiveData data;
  try {
    data = read_archive(dir);
  } catch (const Error& e) {
    report.ok = false;
    report.problems.emplace_back(e.what());
    return report;
  }

  // Requirement descriptors from the manifest: req <id> <column|-> <runtime|design>
  std::vector<RequirementDescriptor> requirements;
  if (const KvNode* reqs = data.manifest.find("requirements")) {
    for (const KvNode* r : reqs->all("req")) {
      RequirementDescriptor d;
      d.id = r->arg(0);
      d.value_column = r->arg(1) == "-" ? "" : r->arg(1);
      d.design_time = r->arg(2) == "design";
      requirements.push_back(std::move(d));
    }
  } else {
    flag("run.kv lacks a requirements block");
  }
  std::size_t config_fields = static_cast<std::size_t>(data.manifest.num_of("config-fields", 0));
  if (config_fields == 0) flag("run.kv lacks config-fields");

  std::string design_digest;
  if (fs::exists(dir + "/design_report.txt"))
    design_digest = digest_hex(read_file(dir + "/design_report.txt"));
  else
    flag("missing design_report.txt");

  std::ostringstream table;
  table << "seq  t          decision  feasible  target / event\n";

  std::set<int> seen_versions;
  for (const auto& r : data.records) {
    table << seq_name(r.seq) << " " << format_double(r.timestamp) << "  " << r.decision << "  "
          << r.feasible_count << "  " << r.target_summary << "  [" << r.event << "]\n";
    if (r.decision == "no-action") continue;

    const std::string evidence_path = dir + "/evidence/" + seq_name(r.seq) + ".csv";
    const std::string outline_path = dir + "/arguments/" + seq_name(r.seq) + ".txt";
    const std::string dot_path = dir + "/arguments/" + seq_name(r.seq) + ".dot";
    if (!fs::exists(evidence_path)) {
      flag("record " + std::to_string(r.seq) + " lacks evidence CSV");
      continue;
    }
    if (!fs::exists(outline_path) || !fs::exists(dot_path)) {
      flag("record " + std::to_string(r.seq) + " lacks argument files");
      continue;
    }
    if (r.argument_version < 0) flag("record " + std::to_string(r.seq) + " has no argument version");
    if (!seen_versions.insert(r.argument_version).second)
      flag("argument version " + std::to_string(r.argument_version) + " reused");

    EvidenceCsv evidence = load_evidence_csv(evidence_path);
    if (digest_hex(evidence.raw) != r.evidence_digest)
      flag("record " + std::to_string(r.seq) + " evidence digest does not match the CSV");

    GsnArgument argument;
    try {
      argument = parse_outline(read_file(outline_path));
    } catch (const Error& e) {
      flag("record " + std::to_string(r.seq) + " argument unparseable: " + e.what());
      continue;
    }
    auto problems = validate(argument);
    for (const auto& p : problems)
      flag("record " + std::to_string(r.seq) + " argument invalid: " + p);
    if (argument.stage != GsnStage::Full)
      flag("record " + std::to_string(r.seq) + " argument is not a full argument");
    for (const auto& n : argument.nodes)
      if (n.uninstantiated)
        flag("record " + std::to_string(r.seq) + " argument has uninstantiated node " + n.id);

    const GsnNode* context = argument.find("ReqsConfiguration");
    if (!context || context->text.find(r.target_summary) == std::string::npos)
      flag("record " + std::to_string(r.seq) +
           " argument context does not name the decision target");

    // Every evidence reference must re-derive from archived evidence.
    std::set<std::string> derivable{platform_evidence_digest()};
    if (!design_digest.empty()) derivable.insert(design_digest);
    if (evidence.header.size() > config_fields) {
      std::string batch_digest = digest_hex(evidence.raw);
      for (const auto& req : requirements) {
        if (req.design_time) continue;
        derivable.insert(evidence_batch_digest(batch_digest, req.id));
      }
      for (const auto& row : evidence.rows) {
        if (row.size() != evidence.header.size()) continue;
        std::string summary;
        for (std::size_t i = 0; i < config_fields; ++i) {
          if (i) summary += ' ';
          summary += evidence.header[i] + "=" + row[i];
        }
        for (const auto& req : requirements) {
          if (req.design_time || req.value_column.empty()) continue;
          for (std::size_t i = config_fields; i < evidence.header.size(); ++i) {
            if (evidence.header[i] == req.value_column)
              derivable.insert(digest_hex(summary + "|" + req.id + "|" + row[i]));
          }
        }
      }
    }
    for (const auto& n : argument.nodes) {
      if (!n.evidence_ref) continue;
      if (!derivable.count(*n.evidence_ref))
        flag("record " + std::to_string(r.seq) + " evidence reference of " + n.id +
             " does not resolve");
    }
  }

  report.summary_text = table.str();
  return report;
}

}  // namespace certloop
