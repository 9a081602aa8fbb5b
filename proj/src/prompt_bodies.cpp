// Embedded prompt bodies. The writer, planner, retrieval, description,
// refinement, examiner, data-collection and zero-shot texts are verbatim,
// including their original typos; only the braced symbols became slots.
// planner_expand and the inventor_q* prompts have no published text and
// were written for this project.

#include "prompt_bodies.hpp"

namespace patentpipe::detail {

namespace {

constexpr std::string_view kTitleWriter = R"PROMPT(Draft: {{draft}}

Based on the above patent draft, please generate a patent title that complies with legal and patent regulations, and follows the format below:

<Title>the title of patent</Title>)PROMPT";

constexpr std::string_view kAbstractWriter = R"PROMPT(Draft: {{draft}}

Based on the provided patent draft, please generate a patent abstract that complies with legal and patent regulations, following the format below:

<Abstract>the abstract of patent</Abstract>)PROMPT";

constexpr std::string_view kBackgroundWriter = R"PROMPT(Draft: {{draft}}

Please generate the detailed background information for the patent based on the above patent draft.

The background information should include the technical field of the patent, provide an objective introduction to the existing technology relevant to the invention, and point out any deficiencies or issues in the existing technology. Additionally, summarize the purpose or motivation of the invention without disclosing specific details. Please avoid negative comments about the existing technology or others' patents. The content should be clear and concise, avoiding unnecessary complexity.

Please output in the following format:

<Background>the background information of patent</Background>)PROMPT";

constexpr std::string_view kSummaryWriter = R"PROMPT(Draft: {{draft}}

Please generate the summary for the patent based on the above patent draft. The summary should provide a detailed overview of the invention, including the technical field, the problems in the prior art that the invention addresses, and the key technical features of the invention. The summary should explain how the invention solves the identified problems without delving into specific implementation details. Ensure the summary is clear, concise, and focused on the invention's main objectives and advantages.

Please output in the following format:

<Summary>the summary of the patent</Summary>)PROMPT";

constexpr std::string_view kClaimsWriter = R"PROMPT(Draft: {{draft}}

Based on the patent draft, please generate patent claims that comply with legal and patent regulations.

The claims should be written in clear language, avoiding ambiguity or vague descriptions.The independent claims should cover the core technical features of the invention and should not rely on other claims. The dependent claims should supplement or limit the independent claims, referencing the relevant independent claims.The claims must focus on a single invention, ensuring the unity of the invention, and must be consistent with the content of the draft.

Ensure that the described invention possesses novelty, inventive step, and industrial applicability.The claims should clearly define the scope of the invention's protection through specific technical features (such as components, steps, or systems).Each claim should end with a complete sentence, be numbered sequentially, and have an appropriate scope—neither too narrow nor too broad.

Please strictly adhere to these guidelines when generating the patent claims and following the format below:

<Claims>the claims of patent</Claims>)PROMPT";

constexpr std::string_view kPlanner = R"PROMPT(Draft: {{draft}}

Based on the provided patent draft, I need you to help me write a detailed writing guide for the patent description.

This guide should consist of multiple sections, with each section providing guidance for writing a part of the patent description and including key points to cover for that section.

Please output in the following format:

<Section-1> Main content and key points for writing this section </Section-1>

<Section-2> Main content and key points for writing this section </Section-2>

...

<Section-n> Main content and key points for writing this section </Section-n>

Ensure that each part of the guide is clear, specific and cohesive, covering the entire content of the patent description. Please strictly adhere to the required format.)PROMPT";

constexpr std::string_view kPlannerExpand = R"PROMPT(Draft: {{draft}}

Writing Guideline Overview: {{pgtree}}

Section To Expand: {{section_overview}}

Based on the provided patent draft and the writing guideline overview, divide the section above into subsections and give concrete instructions for writing each subsection of the patent description.

Please output in the following format:

<Subsection-1> Concrete content and key points for writing this subsection </Subsection-1>

<Subsection-2> Concrete content and key points for writing this subsection </Subsection-2>

...

<Subsection-n> Concrete content and key points for writing this subsection </Subsection-n>

Ensure that the subsections together cover the whole section and do not overlap. Please strictly adhere to the required format.)PROMPT";

constexpr std::string_view kPgtreeCollect = R"PROMPT(Description: {{description}}

Based on the provided patent description text, summarize the key parts and provide detailed guidance for drafting the content of each part. Please output in the following format, with each section described in a single paragraph:

<Section-1> Main content and drafting points for this section </Section-1>

<Section-2> Main content and drafting points for this section </Section-2>

...

<Section-n> Main content and drafting points for this section </Section-n>

Ensure that each section is specific and cohesive, covering the full content of the patent description. Please strictly adhere to the required format.)PROMPT";

constexpr std::string_view kRetrieval = R"PROMPT(Reference Conetent: {{reference}}

Writing Plan: {{guideline}}

According to the patent text writing plan, determine which of the following contents are necessary for writing this section, and copy the all relevant content without modifying or adding anything.

Just output the needed information for drafting this subsection.)PROMPT";

constexpr std::string_view kDescriptionWrite = R"PROMPT(<Reference>{{retrieved}}</Reference>

Writing Guideline Overview: {{pgtree}}

Subsection Writing Guideline: {{guideline}}

Based on the content in <Reference></Reference> and the subsection writing guideline, please draft this subsection, ensuring that the description complies with legal and patent regulations.

Just output this subsection of patent description, and don't output other content.)PROMPT";

constexpr std::string_view kDescriptionRefine = R"PROMPT(Writing Guideline Overview: {{pgtree}}

Subsection Writing Guideline: {{guideline}}

The subsection already written: {{subsection}}

Feedback from Patent Examiner: {{feedback}}

Based on the subsection writing guideline and the feedback, revise the subsection to ensure it complies with legal and patent regulations while addressing the examiner's concerns. Do not say anything else. Only output the revised subsection.)PROMPT";

constexpr std::string_view kExaminerReview = R"PROMPT(Draft: {{draft}}

<WritingGuideline> {{guideline}} </WritingGuideline>

<Content> {{subsection}} </Content>

<Requirement>

Accuracy should ensure that technical details are clear and precise, aligning with law and technical standards. Logic should follow a natural progression with a clear structure. Comprehensiveness should fully disclose all necessary information required by the writing guideline. Clarity should feature concise and easily understandable language, balancing technical and legal descriptions. Coherence should ensure smooth expression, avoiding any ambiguity or uncertainty. Consistency should maintain uniform terminology, align fully with the draft, and avoid any contradictions.

</Requirement>

Refer to draft and evaluate whether the content meets the requirement provided, based on the given writing guideline.

If it complies with the requirement and writing guideline, return <Result>Pass</Result>; if it does not comply, return <Result>Fail</Result>.

And you must provide helpful and detailed advice in <Advice>waiting for filling</Advice> regardless of whether the result is Pass or Fail.)PROMPT";

constexpr std::string_view kDraftQualityQ1 = R"PROMPT(# Draft: {{answer}}

# Requirements: The text of this draft section must include the technical problem solved by the invention. If it is included, just return <Result> Pass </Result>; if it is not included, return <Result> Fail </Result>, and provide a detailed explanation in <Reason> waiting for filling </Reason>.

Please tell me if this section of the draft meets the quality standards.)PROMPT";

constexpr std::string_view kDraftQualityQ2 = R"PROMPT(# Draft: {{answer}}

# Requirements: The text of this draft section must include the background of the technology, the existing technical solutions, the shortcomings of the existing technology, and the advantages of the present invention. If it is included, just return <Result> Pass </Result>; if it is not included, return <Result> Fail </Result>, and provide a detailed explanation in <Reason> waiting for filling </Reason>.

Please tell me if this section of the draft meets the quality standards.)PROMPT";

constexpr std::string_view kDraftQualityQ3 = R"PROMPT(# Draft: {{answer}}

# Requirements: The text of this draft section must include a detailed technical solution, which should describe the specific technical means for implementing the invention. If it is included, just return <Result> Pass </Result>; if it is not included, return <Result> Fail </Result>, and provide a detailed explanation in <Reason> waiting for filling </Reason>.

Please tell me if this section of the draft meets the quality standards.)PROMPT";

constexpr std::string_view kDraftQualityQ4 = R"PROMPT(# Draft: {{answer}}

# Requirements: The text of this draft section must include the description of the drawings for the invention, where each figure must correspond to its respective drawing description one by one. If it is included, just return <Result> Pass </Result>; if it is not included, return <Result> Fail </Result>, and provide a detailed explanation in <Reason> waiting for filling </Reason>.

Please tell me if this section of the draft meets the quality standards.)PROMPT";

constexpr std::string_view kDraftQualityQ5 = R"PROMPT(# Draft: {{answer}}

# Requirements: The text of this draft section must include a detailed technical solution, which should describe the specific technical means for implementing the invention. If it is included, just return <Result> Pass </Result>; if it is not included, return <Result> Fail </Result>, and provide a detailed explanation in <Reason> waiting for filling </Reason>

Please tell me if this section of the draft meets the quality standards.)PROMPT";

#define PATENTPIPE_INVENTOR_PROMPT(QUESTION)                                                                     \
    "Patent: {{patent}}\n\nYou are the inventor of the patent above and are preparing a technical draft for a " \
    "patent agent. Answer the following question about your invention in detail, using only information "      \
    "contained in the patent.\n\nQuestion: " QUESTION "\n\nPlease output in the following format:\n\n"           \
    "<Answer>your answer</Answer>"

constexpr std::string_view kInventorQ1 =
    PATENTPIPE_INVENTOR_PROMPT("What is the technical problem that this patent aims to solve?");
constexpr std::string_view kInventorQ2 = PATENTPIPE_INVENTOR_PROMPT(
    "What is the technical background of this invention, the most similar existing solutions, and its advantages "
    "over these solutions?");
constexpr std::string_view kInventorQ3 =
    PATENTPIPE_INVENTOR_PROMPT("What is the detailed technical solution of the invention?");
constexpr std::string_view kInventorQ4 = PATENTPIPE_INVENTOR_PROMPT(
    "What are the key points of the invention, and which points are intended to be protected?");
constexpr std::string_view kInventorQ5 =
    PATENTPIPE_INVENTOR_PROMPT("What is the detailed description of each figure individually?");

#undef PATENTPIPE_INVENTOR_PROMPT

constexpr std::string_view kZeroShot = R"PROMPT(Draft: {{draft}}

Format requirements:

<Patent>

<Title> the title of patent </Title>

<Abstract> the abstract of patent </Abstract>

<Background> the background of patent </Background>

<Summary> the summary of the patent </summary>

<Claims> the claims of patent </Claims>

<Full Description> the full description of patent </Full Description>

</Patent>

Please write a complete patent document based on the above patent draft, following the format requirements. The document should be professional, coherent, clear, and precise.)PROMPT";

}  // namespace

std::string_view builtin_body(TemplateId id) {
    switch (id) {
        case TemplateId::title_writer: return kTitleWriter;
        case TemplateId::abstract_writer: return kAbstractWriter;
        case TemplateId::background_writer: return kBackgroundWriter;
        case TemplateId::summary_writer: return kSummaryWriter;
        case TemplateId::claims_writer: return kClaimsWriter;
        case TemplateId::planner: return kPlanner;
        case TemplateId::planner_expand: return kPlannerExpand;
        case TemplateId::pgtree_collect: return kPgtreeCollect;
        case TemplateId::retrieval: return kRetrieval;
        case TemplateId::description_write: return kDescriptionWrite;
        case TemplateId::description_refine: return kDescriptionRefine;
        case TemplateId::examiner_review: return kExaminerReview;
        case TemplateId::draft_quality_q1: return kDraftQualityQ1;
        case TemplateId::draft_quality_q2: return kDraftQualityQ2;
        case TemplateId::draft_quality_q3: return kDraftQualityQ3;
        case TemplateId::draft_quality_q4: return kDraftQualityQ4;
        case TemplateId::draft_quality_q5: return kDraftQualityQ5;
        case TemplateId::inventor_q1: return kInventorQ1;
        case TemplateId::inventor_q2: return kInventorQ2;
        case TemplateId::inventor_q3: return kInventorQ3;
        case TemplateId::inventor_q4: return kInventorQ4;
        case TemplateId::inventor_q5: return kInventorQ5;
        case TemplateId::zero_shot_full: return kZeroShot;
    }
    return {};
}

}  // namespace patentpipe::detail
