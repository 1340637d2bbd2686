//! Arena-backed abstract syntax tree for the supported Java subset.

use std::fmt;

/// Index of a node in its [`Ast`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Every node kind the parser can produce. Operators get their own kinds so
/// a path like `Name^Multiply_Name` is distinguishable from `Name^Add_Name`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    // Declarations and structure.
    MethodDeclaration,
    Annotation,
    AnnotationArg,
    ThrowsClause,
    ParameterList,
    Parameter,
    TypeRef,
    ArrayType,
    Block,
    // Statements.
    LocalVarDecl,
    VarDeclarator,
    IfStatement,
    WhileStatement,
    DoStatement,
    ForStatement,
    TryStatement,
    CatchClause,
    FinallyClause,
    ReturnStatement,
    ThrowStatement,
    BreakStatement,
    ContinueStatement,
    ExpressionStatement,
    // Assignment and ternary.
    Assignment,
    AssignAdd,
    AssignSubtract,
    AssignMultiply,
    AssignDivide,
    AssignModulo,
    Conditional,
    // Binary operators.
    Or,
    And,
    BitOr,
    BitXor,
    BitAnd,
    Equals,
    NotEquals,
    Less,
    Greater,
    LessEq,
    GreaterEq,
    InstanceOf,
    ShiftLeft,
    ShiftRight,
    ShiftRightUnsigned,
    Add,
    Subtract,
    Multiply,
    Divide,
    Modulo,
    // Unary operators.
    Not,
    Negate,
    UnaryPlus,
    BitNot,
    PreIncrement,
    PreDecrement,
    PostIncrement,
    PostDecrement,
    // Primary expressions.
    MethodCall,
    FieldAccess,
    ArrayAccess,
    ObjectCreation,
    ArrayCreation,
    ArrayInitializer,
    ArgumentList,
    ClassLiteral,
    // Terminals (leaves that carry a value).
    Name,
    NumberLiteral,
    StringLiteral,
    CharLiteral,
    BooleanLiteral,
    NullLiteral,
    Modifier,
    PrimitiveType,
}

impl NodeKind {
    /// Stable name used in canonical path strings; changing any of these
    /// changes every path hash, so they are part of the on-disk format.
    pub fn name(self) -> &'static str {
        use NodeKind::*;
        match self {
            MethodDeclaration => "MethodDeclaration",
            Annotation => "Annotation",
            AnnotationArg => "AnnotationArg",
            ThrowsClause => "ThrowsClause",
            ParameterList => "ParameterList",
            Parameter => "Parameter",
            TypeRef => "TypeRef",
            ArrayType => "ArrayType",
            Block => "Block",
            LocalVarDecl => "LocalVarDecl",
            VarDeclarator => "VarDeclarator",
            IfStatement => "IfStatement",
            WhileStatement => "WhileStatement",
            DoStatement => "DoStatement",
            ForStatement => "ForStatement",
            TryStatement => "TryStatement",
            CatchClause => "CatchClause",
            FinallyClause => "FinallyClause",
            ReturnStatement => "ReturnStatement",
            ThrowStatement => "ThrowStatement",
            BreakStatement => "BreakStatement",
            ContinueStatement => "ContinueStatement",
            ExpressionStatement => "ExpressionStatement",
            Assignment => "Assignment",
            AssignAdd => "AssignAdd",
            AssignSubtract => "AssignSubtract",
            AssignMultiply => "AssignMultiply",
            AssignDivide => "AssignDivide",
            AssignModulo => "AssignModulo",
            Conditional => "Conditional",
            Or => "Or",
            And => "And",
            BitOr => "BitOr",
            BitXor => "BitXor",
            BitAnd => "BitAnd",
            Equals => "Equals",
            NotEquals => "NotEquals",
            Less => "Less",
            Greater => "Greater",
            LessEq => "LessEq",
            GreaterEq => "GreaterEq",
            InstanceOf => "InstanceOf",
            ShiftLeft => "ShiftLeft",
            ShiftRight => "ShiftRight",
            ShiftRightUnsigned => "ShiftRightUnsigned",
            Add => "Add",
            Subtract => "Subtract",
            Multiply => "Multiply",
            Divide => "Divide",
            Modulo => "Modulo",
            Not => "Not",
            Negate => "Negate",
            UnaryPlus => "UnaryPlus",
            BitNot => "BitNot",
            PreIncrement => "PreIncrement",
            PreDecrement => "PreDecrement",
            PostIncrement => "PostIncrement",
            PostDecrement => "PostDecrement",
            MethodCall => "MethodCall",
            FieldAccess => "FieldAccess",
            ArrayAccess => "ArrayAccess",
            ObjectCreation => "ObjectCreation",
            ArrayCreation => "ArrayCreation",
            ArrayInitializer => "ArrayInitializer",
            ArgumentList => "ArgumentList",
            ClassLiteral => "ClassLiteral",
            Name => "Name",
            NumberLiteral => "NumberLiteral",
            StringLiteral => "StringLiteral",
            CharLiteral => "CharLiteral",
            BooleanLiteral => "BooleanLiteral",
            NullLiteral => "NullLiteral",
            Modifier => "Modifier",
            PrimitiveType => "PrimitiveType",
        }
    }

    /// Terminal kinds are the leaves that carry a source value; only these
    /// participate in path-context extraction.
    pub fn is_terminal(self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            Name | NumberLiteral
                | StringLiteral
                | CharLiteral
                | BooleanLiteral
                | NullLiteral
                | Modifier
                | PrimitiveType
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstNode {
    pub kind: NodeKind,
    /// Source value for terminal nodes (`None` for interior nodes).
    pub value: Option<String>,
    pub children: Vec<NodeId>,
}

/// An arena of nodes plus the root id. Node ids are assigned in parser
/// creation order, so parsing the same text twice yields an identical tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ast {
    nodes: Vec<AstNode>,
    root: NodeId,
}

impl Ast {
    pub fn new(nodes: Vec<AstNode>, root: NodeId) -> Self {
        assert!(root.index() < nodes.len(), "root id out of bounds");
        Ast { nodes, root }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Terminal nodes in source order (in-order traversal of the leaves).
    pub fn terminals(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let node = self.node(id);
            if node.kind.is_terminal() {
                out.push(id);
            }
            // Push children reversed so the leftmost child is visited first.
            for &child in node.children.iter().rev() {
                stack.push(child);
            }
        }
        out
    }

    /// Parent of each node (`None` for the root), indexable by `NodeId::index`.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parents = vec![None; self.nodes.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            for &child in &node.children {
                parents[child.index()] = Some(NodeId(idx as u32));
            }
        }
        parents
    }

    /// Maximum number of edges from the root to any node.
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            max = max.max(d);
            for &child in &self.node(id).children {
                stack.push((child, d + 1));
            }
        }
        max
    }

    /// The method's own name: the first direct `Name` child of a
    /// `MethodDeclaration` root.
    pub fn method_name_terminal(&self) -> Option<NodeId> {
        let root = self.node(self.root);
        if root.kind != NodeKind::MethodDeclaration {
            return None;
        }
        root.children
            .iter()
            .copied()
            .find(|&c| self.node(c).kind == NodeKind::Name)
    }

    /// Value of the method name terminal, if present.
    pub fn method_name(&self) -> Option<&str> {
        self.method_name_terminal()
            .and_then(|id| self.node(id).value.as_deref())
    }
}

/// Incremental builder used by the parser.
#[derive(Debug, Default)]
pub struct AstBuilder {
    nodes: Vec<AstNode>,
}

impl AstBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn interior(&mut self, kind: NodeKind, children: Vec<NodeId>) -> NodeId {
        debug_assert!(!kind.is_terminal(), "interior node with terminal kind");
        self.push(AstNode { kind, value: None, children })
    }

    pub fn terminal(&mut self, kind: NodeKind, value: impl Into<String>) -> NodeId {
        debug_assert!(kind.is_terminal(), "terminal node with interior kind");
        self.push(AstNode { kind, value: Some(value.into()), children: Vec::new() })
    }

    pub fn push(&mut self, node: AstNode) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    pub fn kind_of(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    pub fn finish(self, root: NodeId) -> Ast {
        Ast::new(self.nodes, root)
    }
}
