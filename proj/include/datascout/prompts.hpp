// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <string_view>

/// Prompt templates. The stub chat backend recognises requests by the
/// markers defined here, so the templates and the stub must stay in sync.
namespace datascout::prompts {

inline constexpr std::string_view kSupervisorPlaceholder = "[SUPERVISOR-OUTPUT]";

inline constexpr std::string_view kOverarchingDescription =
    "You are a helpful data analyst. You have been given metadata about a dataset. Write a short description "
    "for the dataset. Consider the following additional information [SUPERVISOR-OUTPUT]. If possible from the "
    "labels, say what the data content is.";

/// Appended to the overarching-description prompt so the reply can be parsed.
inline constexpr std::string_view kReportFormatSuffix =
    "\n\nAnswer with exactly three sections, each starting on its own line: \"Description:\" followed by the "
    "description, \"Domain:\" followed by the scientific domain, and \"Keywords:\" followed by 3 to 7 "
    "comma-separated keywords.";

inline constexpr std::string_view kSummarizeMarker = "SUMMARIZE:";
inline constexpr std::string_view kMergeMarker = "MERGE:";

inline constexpr std::string_view kSummarizeText =
    "Summarize the following text as short bullet point notes, one fact per bullet.\nSUMMARIZE:\n";

inline constexpr std::string_view kMergeText =
    "Merge the following partial bullet summaries of one document into a single bullet list without "
    "repeating facts.\nMERGE:\n";

inline constexpr std::string_view kMapAnalysis =
    "Summarize the following analysis result as short bullet points. Keep every feature name.\nSUMMARIZE:\n";

inline constexpr std::string_view kReduceContent =
    "Merge the partial summaries below into one data content summary covering feature names and "
    "descriptions, kernel density estimates, publication key points and word distributions. Keep one bullet "
    "per fact.\nMERGE:\n";

inline constexpr std::string_view kReduceRecord =
    "Consolidate the following file summaries into a single unified summary of the whole dataset record.\nMERGE:\n";

inline constexpr std::string_view kQuestionGeneration =
    "Here you have the summary of a paper about a dataset: {text}. Based on the summary of the paper, create a "
    "list of 15 questions that include enough information to understand what is the paper, but that would "
    "require access to the data used for the experiments in the paper to be answered. The goal of the question "
    "is to identify a dataset that could bring to the discoveries made in the paper.";

inline constexpr std::string_view kGenerationAgent =
    "You are an agent designed to write and execute python code to generate synthetic data from a query.\n"
    "You have access to a python REPL, which you can use to execute python code.\n"
    "If you get an error, debug your code and try again until there are no errors.\n"
    "Generate {n_samples} synthetic data samples about the {subject} dataset.\n"
    "Examples here {examples}.\n"
    "Now, generate python code that creates a pandas dataframe where each column is sampled {sampling}\n"
    "Save the pandas dataframe in a csv file {output_file}.\n";

inline constexpr std::string_view kSamplingWithStats = "according to their statistical information contained in {metadata_stats}.";
inline constexpr std::string_view kSamplingExamplesOnly = "as in the examples above.";

inline constexpr std::string_view kGenerationRetry =
    "\nThe previous script failed. Error output:\n{error}\nFix the code and reply with the complete corrected "
    "script in a single fenced code block.\n";

}  // namespace datascout::prompts
