// bra: one binary, noun-verb subcommands over the core library.
//
// Exit codes: 0 success, 1 validation or check failure, 2 usage or I/O
// error. With --format json every result is a machine-readable document.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bra/io.hpp"
#include "bra/registry.hpp"

namespace {

using nlohmann::json;

// Distinguishes "could not read/write the file" (exit 2) from domain
// failures surfaced by the library (exit 1).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  try {
    return bra::read_file(path);
  } catch (const bra::BraError& e) {
    throw IoError(e.what());
  }
}

void spit(const std::string& path, const std::string& content) {
  try {
    bra::write_file(path, content);
  } catch (const bra::BraError& e) {
    throw IoError(e.what());
  }
}

struct Output {
  std::string format = "text";

  void emit(const json& doc, const std::string& text_form) const {
    if (format == "json") {
      std::cout << bra::dump_canonical(doc);
    } else {
      std::cout << text_form;
    }
  }
};

std::string report_text(const bra::ValidationReport& report) {
  std::string out;
  for (const auto& f : report.findings) {
    out += std::string(bra::to_string(f.severity)) + " [" + f.rule + "] " +
           (f.element.empty() ? "" : f.element + ": ") + f.message + "\n";
  }
  out += std::to_string(report.error_count()) + " error(s), " +
         std::to_string(report.warning_count()) + " warning(s)\n";
  return out;
}

int finish_report(const Output& out, const bra::ValidationReport& report) {
  out.emit(bra::report_to_json(report), report_text(report));
  return report.has_errors() ? 1 : 0;
}

std::set<std::string> roi_set(const std::vector<std::string>& raw) {
  std::set<std::string> roi;
  for (const auto& entry : raw) {
    std::string item;
    for (char c : entry + ",") {
      if (c == ',') {
        if (!item.empty()) roi.insert(item);
        item.clear();
      } else {
        item.push_back(c);
      }
    }
  }
  return roi;
}

bra::DocKind kind_arg(const std::string& text) {
  try {
    return bra::doc_kind_from_string(text);
  } catch (const bra::BraError& e) {
    throw CLI::ValidationError("--kind", e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BRA toolkit: validate, bind, enumerate, simulate, score"};
  app.require_subcommand(1);

  Output out;
  app.add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  // Each subcommand registers a callback returning the exit code.
  int exit_code = 0;
  auto set = [&](int code) { exit_code = code; };

  // --- validate ----------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "Structural validation");
  {
    auto* vbif = validate->add_subcommand("bif", "Validate a circuit graph");
    auto file = std::make_shared<std::string>();
    vbif->add_option("file", *file, "Document path")->required();
    vbif->callback([&, file] {
      set(finish_report(out, bra::validate_bif(bra::parse_bif(slurp(*file)))));
    });

    auto* vhcd = validate->add_subcommand("hcd", "Validate a component diagram");
    auto hfile = std::make_shared<std::string>();
    auto bfile = std::make_shared<std::string>();
    auto mfile = std::make_shared<std::string>();
    vhcd->add_option("file", *hfile, "Document path")->required();
    vhcd->add_option("--bif", *bfile, "Circuit graph to check the mapping against");
    vhcd->add_option("--mapping", *mfile, "Mapping document")->needs(vhcd->get_option("--bif"));
    vhcd->callback([&, hfile, bfile, mfile] {
      const bra::Hcd hcd = bra::parse_hcd(slurp(*hfile));
      bra::ValidationReport report = bra::validate_hcd(hcd);
      if (!bfile->empty() && !mfile->empty()) {
        const bra::Bif bif = bra::parse_bif(slurp(*bfile));
        const bra::BraMapping mapping = bra::parse_mapping(slurp(*mfile));
        for (auto& f : bra::check_structural_consistency(bif, hcd, mapping).findings) {
          report.findings.push_back(std::move(f));
        }
      }
      set(finish_report(out, report));
    });
  }

  // --- adequacy ----------------------------------------------------------
  {
    auto* adequacy = app.add_subcommand("adequacy", "Aggregate adequacy review");
    struct Args {
      std::string bif, hcd, mapping, store, trace, schedule, milestones;
    };
    auto a = std::make_shared<Args>();
    adequacy->add_option("--bif", a->bif)->required();
    adequacy->add_option("--hcd", a->hcd)->required();
    adequacy->add_option("--mapping", a->mapping)->required();
    adequacy->add_option("--store", a->store, "Registry directory (novelty check)");
    adequacy->add_option("--trace", a->trace, "Harness trace CSV (functionality)");
    adequacy->add_option("--schedule", a->schedule,
                         "Schedule CSV, needed for input-relative goals");
    adequacy->add_option("--milestones", a->milestones, "Milestone list");
    adequacy->callback([&, a] {
      const bra::Bif bif = bra::parse_bif(slurp(a->bif));
      const bra::Hcd hcd = bra::parse_hcd(slurp(a->hcd));
      const bra::BraMapping mapping = bra::parse_mapping(slurp(a->mapping));
      std::optional<bra::Registry> store;
      if (!a->store.empty()) store = bra::Registry::open(a->store);
      std::optional<bra::Trace> trace;
      if (!a->trace.empty()) trace = bra::parse_trace_csv(slurp(a->trace));
      std::optional<bra::Schedule> schedule;
      if (!a->schedule.empty()) {
        schedule = bra::parse_schedule_csv(slurp(a->schedule));
      }
      std::vector<bra::Milestone> milestones;
      if (!a->milestones.empty()) {
        milestones = bra::parse_milestones(slurp(a->milestones));
      }
      const bra::AdequacyReport report = bra::evaluate_adequacy(
          bif, hcd, mapping, store ? &*store : nullptr,
          trace ? &*trace : nullptr, milestones,
          schedule ? &*schedule : nullptr);
      std::string text = report_text(report.findings);
      text += std::string("certifiable: ") + (report.certifiable ? "yes" : "no") + "\n";
      if (report.functionality) {
        text += "functionality: " +
                std::string(bra::to_string(*report.functionality)) + "\n";
      }
      out.emit(bra::adequacy_to_json(report), text);
      set(report.certifiable ? 0 : 1);
    });
  }

  // --- scid --------------------------------------------------------------
  {
    auto* scid = app.add_subcommand("scid", "Candidate-circuit identification");
    struct Args {
      std::string bif, tmpl, rules, soft, candidates, out_file, out_hcd,
          out_mapping, bif_id;
      std::vector<std::string> roi;
      std::size_t limit = 0;
      int max_path_len = 0;
      int jobs = 1;
      std::size_t index = 0;
    };
    auto a = std::make_shared<Args>();

    auto add_common = [&](CLI::App* cmd, bool with_template) {
      cmd->add_option("--bif", a->bif)->required();
      cmd->add_option("--roi", a->roi, "Circuit ids (repeatable or comma-separated)")
          ->required();
      if (with_template) cmd->add_option("--template", a->tmpl)->required();
    };

    auto* feasible = scid->add_subcommand("feasible", "External I/O feasibility");
    add_common(feasible, true);
    feasible->callback([&, a] {
      const bra::Bif bif = bra::parse_bif(slurp(a->bif));
      const bra::FunctionTemplate tmpl = bra::parse_template(slurp(a->tmpl));
      const auto verdict =
          bra::check_io_feasibility(bif, roi_set(a->roi), tmpl);
      std::string text =
          std::string("feasible: ") + (verdict.feasible ? "yes" : "no") + "\n";
      for (const auto& name : verdict.unbindable) {
        text += "unbindable: " + name + "\n";
      }
      out.emit(bra::feasibility_to_json(verdict), text);
      set(verdict.feasible ? 0 : 1);
    });

    auto emit_candidates = [&out, a](const bra::CandidateSet& result) {
      const std::string doc = bra::serialize_candidates(result);
      if (!a->out_file.empty()) {
        spit(a->out_file, doc);
      } else if (out.format == "json") {
        std::cout << doc;
      } else {
        std::size_t surviving = 0;
        for (const auto& c : result.candidates) {
          if (c.status == bra::CandidateHcd::Status::surviving) ++surviving;
        }
        std::cout << result.candidates.size() << " candidate(s), " << surviving
                  << " surviving" << (result.truncated ? " (truncated)" : "")
                  << "\n";
      }
    };

    auto* enumerate = scid->add_subcommand("enumerate", "Enumerate candidates");
    add_common(enumerate, true);
    enumerate->add_option("--limit", a->limit, "Stop after N candidates");
    enumerate->add_option("--max-path-len", a->max_path_len,
                          "Clamp on role-edge path lengths");
    enumerate->add_option("--jobs", a->jobs, "Worker threads (output invariant)");
    enumerate->add_option("--out", a->out_file, "Candidate-set output path");
    enumerate->callback([&, a, emit_candidates] {
      const bra::Bif bif = bra::parse_bif(slurp(a->bif));
      const bra::FunctionTemplate tmpl = bra::parse_template(slurp(a->tmpl));
      bra::EnumerationOptions opts;
      if (a->limit > 0) opts.limit = a->limit;
      opts.max_path_len_cap = a->max_path_len;
      opts.jobs = a->jobs;
      const auto result =
          bra::enumerate_candidates(bif, roi_set(a->roi), tmpl, opts);
      emit_candidates({tmpl.id, result.truncated, result.candidates});
      set(0);
    });

    auto* filter = scid->add_subcommand("filter", "Apply rejection rules");
    add_common(filter, false);
    filter->add_option("--candidates", a->candidates)->required();
    filter->add_option("--rules", a->rules)->required();
    filter->add_option("--out", a->out_file, "Candidate-set output path");
    filter->callback([&, a, emit_candidates] {
      const bra::Bif bif = bra::parse_bif(slurp(a->bif));
      bra::CandidateSet cset = bra::parse_candidates(slurp(a->candidates));
      const auto rules = bra::parse_rules(slurp(a->rules));
      cset.candidates = bra::apply_rejection_rules(
          bif, roi_set(a->roi), std::move(cset.candidates), rules);
      emit_candidates(cset);
      set(0);
    });

    auto* rank = scid->add_subcommand("rank", "Rank surviving candidates");
    add_common(rank, false);
    rank->add_option("--candidates", a->candidates)->required();
    rank->add_option("--soft", a->soft, "Soft-constraint list")->required();
    rank->add_option("--out", a->out_file, "Candidate-set output path");
    rank->callback([&, a, emit_candidates] {
      const bra::Bif bif = bra::parse_bif(slurp(a->bif));
      bra::CandidateSet cset = bra::parse_candidates(slurp(a->candidates));
      const auto soft = bra::parse_soft_constraints(slurp(a->soft));
      cset.candidates = bra::rank_candidates(bif, roi_set(a->roi),
                                             std::move(cset.candidates), soft);
      emit_candidates(cset);
      set(0);
    });

    auto* materialize =
        scid->add_subcommand("materialize", "Emit HCD + mapping for a candidate");
    add_common(materialize, true);
    materialize->add_option("--candidates", a->candidates)->required();
    materialize->add_option("--index", a->index,
                            "Position among surviving candidates")
        ->capture_default_str();
    materialize->add_option("--bif-id", a->bif_id, "BIF id recorded in the mapping");
    materialize->add_option("--out-hcd", a->out_hcd)->required();
    materialize->add_option("--out-mapping", a->out_mapping)->required();
    materialize->callback([&, a] {
      const bra::Bif bif = bra::parse_bif(slurp(a->bif));
      const bra::FunctionTemplate tmpl = bra::parse_template(slurp(a->tmpl));
      const bra::CandidateSet cset = bra::parse_candidates(slurp(a->candidates));
      std::vector<const bra::CandidateHcd*> surviving;
      for (const auto& c : cset.candidates) {
        if (c.status == bra::CandidateHcd::Status::surviving) {
          surviving.push_back(&c);
        }
      }
      if (a->index >= surviving.size()) {
        throw bra::BraError("no surviving candidate at index " +
                            std::to_string(a->index) + " (have " +
                            std::to_string(surviving.size()) + ")");
      }
      auto [hcd, mapping] = bra::materialize_hcd(bif, *surviving[a->index],
                                                 tmpl, a->bif_id,
                                                 roi_set(a->roi));
      spit(a->out_hcd, bra::serialize_hcd(hcd));
      spit(a->out_mapping, bra::serialize_mapping(mapping));
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "materialized"},
                {"hcd", a->out_hcd},
                {"mapping", a->out_mapping}},
               "wrote " + a->out_hcd + " and " + a->out_mapping + "\n");
      set(0);
    });
  }

  // --- registry ----------------------------------------------------------
  {
    auto* registry = app.add_subcommand("registry", "File-backed document store");
    struct Args {
      std::string store = bra::default_store_dir().string();
      std::string kind, id, file, reviewer = "cli", notes, adequacy;
      std::string state, label_prefix, roi_member;
      bool draft = false;
    };
    auto a = std::make_shared<Args>();

    auto add_store = [&](CLI::App* cmd) {
      cmd->add_option("--store", a->store, "Store directory (env BRA_STORE)")
          ->capture_default_str();
    };

    auto* submit = registry->add_subcommand("submit", "Add a new entry version");
    add_store(submit);
    submit->add_option("--kind", a->kind)->required();
    submit->add_option("--id", a->id)->required();
    submit->add_option("--file", a->file, "Document payload")->required();
    submit->add_flag("--draft", a->draft, "Keep the entry out of review");
    submit->callback([&, a] {
      auto store = bra::Registry::open(a->store);
      const auto entry =
          store.submit(kind_arg(a->kind), a->id,
                       nlohmann::json::parse(slurp(a->file)), !a->draft);
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "registry-entry"},
                {"ref", entry.ref()},
                {"state", std::string(bra::to_string(entry.state))}},
               entry.ref() + " " + std::string(bra::to_string(entry.state)) +
                   "\n");
      set(0);
    });

    auto* certify = registry->add_subcommand("certify", "in-review -> certified");
    add_store(certify);
    certify->add_option("--kind", a->kind)->required();
    certify->add_option("--id", a->id)->required();
    certify->add_option("--reviewer", a->reviewer)->capture_default_str();
    certify->add_option("--notes", a->notes);
    certify->add_option("--adequacy", a->adequacy,
                        "Adequacy report backing the certification");
    certify->callback([&, a] {
      auto store = bra::Registry::open(a->store);
      std::optional<bool> certifiable;
      if (!a->adequacy.empty()) {
        const json report = json::parse(slurp(a->adequacy));
        certifiable = report.value("certifiable", false);
      }
      const auto entry = store.certify(kind_arg(a->kind), a->id, a->reviewer,
                                       a->notes, certifiable);
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "registry-entry"},
                {"ref", entry.ref()},
                {"state", std::string(bra::to_string(entry.state))}},
               entry.ref() + " certified\n");
      set(0);
    });

    auto* reject = registry->add_subcommand("reject", "in-review -> rejected");
    add_store(reject);
    reject->add_option("--kind", a->kind)->required();
    reject->add_option("--id", a->id)->required();
    reject->add_option("--reviewer", a->reviewer)->capture_default_str();
    reject->add_option("--notes", a->notes);
    reject->callback([&, a] {
      auto store = bra::Registry::open(a->store);
      const auto entry =
          store.reject(kind_arg(a->kind), a->id, a->reviewer, a->notes);
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "registry-entry"},
                {"ref", entry.ref()},
                {"state", std::string(bra::to_string(entry.state))}},
               entry.ref() + " rejected\n");
      set(0);
    });

    auto* list = registry->add_subcommand("list", "Query entries");
    add_store(list);
    list->add_option("--kind", a->kind);
    list->add_option("--state", a->state);
    list->add_option("--label-prefix", a->label_prefix);
    list->add_option("--roi-member", a->roi_member);
    list->callback([&, a] {
      auto store = bra::Registry::open(a->store);
      bra::RegistryFilter filter;
      if (!a->kind.empty()) filter.kind = kind_arg(a->kind);
      if (!a->state.empty()) {
        filter.state = bra::entry_state_from_string(a->state);
      }
      filter.label_prefix = a->label_prefix;
      filter.roi_member = a->roi_member;
      json entries = json::array();
      std::string text;
      for (const auto& entry : store.query(filter)) {
        entries.push_back({{"ref", entry.ref()},
                           {"state", std::string(bra::to_string(entry.state))},
                           {"created_at", entry.created_at},
                           {"certified_at", entry.certified_at}});
        text += entry.ref() + " " + std::string(bra::to_string(entry.state)) +
                "\n";
      }
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "registry-list"},
                {"entries", entries}},
               text);
      set(0);
    });
  }

  // --- harness -----------------------------------------------------------
  {
    auto* harness = app.add_subcommand("harness", "Stub execution");
    auto* run = harness->add_subcommand("run", "Run a diagram of stubs");
    struct Args {
      std::string hcd, stubs, schedule, out_file;
      int steps = 1;
      std::uint64_t seed = 0;
    };
    auto a = std::make_shared<Args>();
    run->add_option("--hcd", a->hcd)->required();
    run->add_option("--stubs", a->stubs)->required();
    run->add_option("--schedule", a->schedule, "Input schedule CSV");
    run->add_option("--steps", a->steps)->required();
    run->add_option("--seed", a->seed)->capture_default_str();
    run->add_option("--out", a->out_file, "Trace CSV path")->required();
    run->callback([&, a] {
      const bra::Hcd hcd = bra::parse_hcd(slurp(a->hcd));
      const bra::StubBindings stubs = bra::parse_stubs(slurp(a->stubs));
      bra::Schedule schedule;
      if (!a->schedule.empty()) {
        schedule = bra::parse_schedule_csv(slurp(a->schedule));
      }
      const bra::Trace trace = bra::run(hcd, stubs, schedule, a->steps, a->seed);
      spit(a->out_file, bra::serialize_trace_csv(trace));
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "harness-run"},
                {"steps", trace.steps},
                {"seed", trace.seed},
                {"config_hash", trace.config_hash},
                {"out", a->out_file}},
               "seed " + std::to_string(trace.seed) + ", " +
                   std::to_string(trace.steps) + " step(s) -> " + a->out_file +
                   "\n");
      set(0);
    });
  }

  // --- fidelity ----------------------------------------------------------
  {
    auto* fidelity = app.add_subcommand("fidelity", "Implementation scoring");
    struct Args {
      std::string impl, bif, trace, reference, hcd, constraints, pairing,
          stubs, tasks;
      std::vector<std::string> roi;
      double threshold = 0.5;
    };
    auto a = std::make_shared<Args>();

    auto* structural = fidelity->add_subcommand("structural", "Graph overlap");
    structural->add_option("--impl", a->impl)->required();
    structural->add_option("--bif", a->bif)->required();
    structural->add_option("--roi", a->roi)->required();
    structural->callback([&, a] {
      const auto scores = bra::structural_similarity(
          bra::parse_impl(slurp(a->impl)), bra::parse_bif(slurp(a->bif)),
          roi_set(a->roi));
      char text[128];
      std::snprintf(text, sizeof(text), "combined %.9g (node F1 %.9g, edge F1 %.9g)\n",
                    scores.combined, scores.f1_node, scores.f1_edge);
      out.emit(bra::structural_scores_to_json(scores), text);
      set(0);
    });

    auto* functional = fidelity->add_subcommand("functional", "Ordering constraints");
    functional->add_option("--trace", a->trace)->required();
    functional->add_option("--hcd", a->hcd)->required();
    functional->add_option("--constraints", a->constraints)->required();
    functional->callback([&, a] {
      const double score = bra::functional_similarity(
          bra::parse_trace_csv(slurp(a->trace)), bra::parse_hcd(slurp(a->hcd)),
          bra::parse_constraints(slurp(a->constraints)));
      char text[64];
      std::snprintf(text, sizeof(text), "functional %.9g\n", score);
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "fidelity-functional"},
                {"score", score}},
               text);
      set(0);
    });

    auto* activity = fidelity->add_subcommand("activity", "Trace overlap");
    activity->add_option("--trace", a->trace)->required();
    activity->add_option("--reference", a->reference)->required();
    activity->add_option("--pairing", a->pairing)->required();
    activity->add_option("--threshold", a->threshold)->capture_default_str();
    activity->callback([&, a] {
      const auto result = bra::activity_reproducibility(
          bra::parse_trace_csv(slurp(a->trace)),
          bra::parse_trace_csv(slurp(a->reference)),
          bra::parse_pairing(slurp(a->pairing)), a->threshold);
      char text[64];
      std::snprintf(text, sizeof(text), "activity %.9g\n", result.mean);
      out.emit(bra::activity_to_json(result), text);
      set(0);
    });

    auto* performance = fidelity->add_subcommand("performance", "Task pass rate");
    performance->add_option("--hcd", a->hcd)->required();
    performance->add_option("--stubs", a->stubs)->required();
    performance->add_option("--tasks", a->tasks)->required();
    performance->callback([&, a] {
      const auto result = bra::performance_eval(
          bra::parse_hcd(slurp(a->hcd)), bra::parse_stubs(slurp(a->stubs)),
          bra::parse_tasks(slurp(a->tasks)));
      std::string text;
      for (const auto& t : result.tasks) {
        text += t.name + ": " + (t.passed ? "pass" : "fail") +
                (t.cause.empty() ? "" : " (" + t.cause + ")") + "\n";
      }
      char rate[64];
      std::snprintf(rate, sizeof(rate), "rate %.9g\n", result.rate);
      out.emit(bra::performance_to_json(result), text + rate);
      set(0);
    });
  }

  // --- merge -------------------------------------------------------------
  {
    auto* merge = app.add_subcommand("merge", "Combine overlapping diagrams");
    struct Args {
      std::string map_a, map_b, hcd_a, hcd_b, fidelity_a, fidelity_b, out_file;
      std::string policy = "select-by-fidelity";
    };
    auto a = std::make_shared<Args>();

    auto* scan = merge->add_subcommand("scan", "Detect shared circuits");
    scan->add_option("--map-a", a->map_a)->required();
    scan->add_option("--map-b", a->map_b)->required();
    scan->callback([&, a] {
      const auto shared = bra::merge_scan(bra::parse_mapping(slurp(a->map_a)),
                                          bra::parse_mapping(slurp(a->map_b)));
      json pairs = json::array();
      std::string text;
      for (const auto& p : shared) {
        pairs.push_back({{"circuit", p.circuit},
                         {"component_a", p.component_a},
                         {"component_b", p.component_b}});
        text += p.circuit + ": " + p.component_a + " / " + p.component_b + "\n";
      }
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "merge-scan"},
                {"pairs", pairs}},
               text.empty() ? "no shared circuits\n" : text);
      set(0);
    });

    auto* plan = merge->add_subcommand("plan", "Produce the merged diagram");
    plan->add_option("--hcd-a", a->hcd_a)->required();
    plan->add_option("--hcd-b", a->hcd_b)->required();
    plan->add_option("--map-a", a->map_a)->required();
    plan->add_option("--map-b", a->map_b)->required();
    plan->add_option("--fidelity-a", a->fidelity_a,
                     "Per-component scores for side A (JSON object)");
    plan->add_option("--fidelity-b", a->fidelity_b,
                     "Per-component scores for side B (JSON object)");
    plan->add_option("--policy", a->policy)
        ->check(CLI::IsMember({"select-by-fidelity", "redesign"}))
        ->capture_default_str();
    plan->add_option("--out", a->out_file, "Merged-HCD output path");
    plan->callback([&, a] {
      const bra::Hcd hcd_a = bra::parse_hcd(slurp(a->hcd_a));
      const bra::Hcd hcd_b = bra::parse_hcd(slurp(a->hcd_b));
      const auto shared = bra::merge_scan(bra::parse_mapping(slurp(a->map_a)),
                                          bra::parse_mapping(slurp(a->map_b)));
      auto load_scores =
          [&](const std::string& path) -> std::map<std::string, double> {
        std::map<std::string, double> scores;
        if (path.empty()) return scores;
        const json doc = json::parse(slurp(path));
        for (const auto& [key, value] : doc.items()) {
          scores[key] = value.get<double>();
        }
        return scores;
      };
      const auto scores_a = load_scores(a->fidelity_a);
      const auto scores_b = load_scores(a->fidelity_b);
      const bra::MergePolicy policy = a->policy == "redesign"
                                          ? bra::MergePolicy::redesign
                                          : bra::MergePolicy::select_by_fidelity;
      const auto plan_result =
          bra::plan_merge(hcd_a, hcd_b, shared,
                          scores_a.empty() ? nullptr : &scores_a,
                          scores_b.empty() ? nullptr : &scores_b, policy);
      if (!a->out_file.empty()) {
        spit(a->out_file, bra::serialize_hcd(plan_result.merged));
      }
      std::string text;
      for (const auto& d : plan_result.decisions) {
        text += d.pair.circuit + ": " + std::string(bra::to_string(d.strategy)) +
                " -> " + d.survivor + (d.tie ? " (tie)" : "") + "\n";
      }
      out.emit(bra::merge_plan_to_json(plan_result),
               text.empty() ? "nothing to merge\n" : text);
      set(0);
    });
  }

  // --- export ------------------------------------------------------------
  {
    auto* exporter = app.add_subcommand("export", "Render documents");
    auto* dot = exporter->add_subcommand("dot", "Graphviz rendering");
    struct Args {
      std::string in, mapping, out_file;
    };
    auto a = std::make_shared<Args>();
    dot->add_option("--in", a->in, "BIF or HCD document")->required();
    dot->add_option("--mapping", a->mapping, "Cluster mapped pairs");
    dot->add_option("--out", a->out_file)->required();
    dot->callback([&, a] {
      const json doc = json::parse(slurp(a->in));
      std::optional<bra::BraMapping> mapping;
      if (!a->mapping.empty()) {
        mapping = bra::parse_mapping(slurp(a->mapping));
      }
      const std::string kind = doc.value("kind", "");
      std::string rendered;
      if (kind == "bif") {
        rendered = bra::export_dot_bif(bra::parse_bif(slurp(a->in)),
                                       mapping ? &*mapping : nullptr);
      } else if (kind == "hcd") {
        rendered = bra::export_dot_hcd(bra::parse_hcd(slurp(a->in)),
                                       mapping ? &*mapping : nullptr);
      } else {
        throw bra::BraError("--in must be a bif or hcd document");
      }
      spit(a->out_file, rendered);
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "export"},
                {"out", a->out_file}},
               "wrote " + a->out_file + "\n");
      set(0);
    });
  }

  // --- import ------------------------------------------------------------
  {
    auto* importer = app.add_subcommand("import", "Ingest foreign formats");
    auto* tsv = importer->add_subcommand("tsv", "Two-sheet spreadsheet export");
    struct Args {
      std::string circuits, connections, out_file;
    };
    auto a = std::make_shared<Args>();
    tsv->add_option("--circuits", a->circuits)->required();
    tsv->add_option("--connections", a->connections)->required();
    tsv->add_option("--out", a->out_file, "Canonical BIF output")->required();
    tsv->callback([&, a] {
      const auto result =
          bra::import_bif_tsv(slurp(a->circuits), slurp(a->connections));
      spit(a->out_file, bra::serialize_bif(result.bif));
      std::string text;
      for (const auto& line : result.log) text += line + "\n";
      text += "wrote " + a->out_file + "\n";
      out.emit({{"format_version", bra::kFormatVersion},
                {"kind", "import-log"},
                {"log", result.log},
                {"out", a->out_file}},
               text);
      set(0);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const bra::ParseError& e) {
    std::cerr << "parse error at " << e.location << ": " << e.detail << "\n";
    return 1;
  } catch (const bra::BraError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
